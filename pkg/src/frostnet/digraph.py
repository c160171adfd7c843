"""Directed communication graphs.

An edge ``(j, i)`` means agent ``j`` sends to agent ``i``. Every node carries a
self-loop, so both neighbor lists of node ``i`` contain ``i`` itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Digraph:
    n: int
    edges: frozenset[tuple[int, int]]
    in_neighbors: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    out_neighbors: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)

    @property
    def num_links(self) -> int:
        """Number of edges excluding self-loops."""
        return len(self.edges) - self.n

    def adjacency(self) -> np.ndarray:
        """Boolean matrix with ``adj[i, j]`` true iff ``j -> i``."""
        adj = np.zeros((self.n, self.n), dtype=bool)
        for j, i in self.edges:
            adj[i, j] = True
        return adj

    def is_symmetric(self) -> bool:
        return all((i, j) in self.edges for j, i in self.edges)

    def symmetrized(self) -> Digraph:
        return from_edge_list(self.n, list(self.edges) + [(i, j) for j, i in self.edges])


def from_edge_list(n: int, edges) -> Digraph:
    """Build a digraph from ``(j, i)`` pairs; self-loops are added, duplicates dropped."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    es = set()
    for pair in edges:
        j, i = (int(v) for v in pair)
        if not (0 <= j < n and 0 <= i < n):
            raise ValueError(f"edge {(j, i)} out of range for n={n}")
        es.add((j, i))
    es.update((i, i) for i in range(n))
    ins = [[] for _ in range(n)]
    outs = [[] for _ in range(n)]
    for j, i in sorted(es):
        ins[i].append(j)
        outs[j].append(i)
    return Digraph(
        n=n,
        edges=frozenset(es),
        in_neighbors=tuple(tuple(sorted(a)) for a in ins),
        out_neighbors=tuple(tuple(sorted(a)) for a in outs),
    )


def strongly_connected_components(g: Digraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep rings do not hit the recursion limit."""
    index = [-1] * g.n
    low = [0] * g.n
    on_stack = [False] * g.n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(g.n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work.pop()
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            succ = g.out_neighbors[v]
            recursed = False
            while pos < len(succ):
                w = succ[pos]
                pos += 1
                if index[w] < 0:
                    work.append((v, pos))
                    work.append((w, 0))
                    recursed = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recursed:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def is_strongly_connected(g: Digraph) -> bool:
    return len(strongly_connected_components(g)) == 1


def gen_ring(n: int) -> Digraph:
    """Directed cycle ``0 -> 1 -> ... -> n-1 -> 0``."""
    if n < 1:
        raise ValueError(f"ring needs n >= 1, got {n}")
    return from_edge_list(n, [(i, (i + 1) % n) for i in range(n)])


def gen_complete(n: int) -> Digraph:
    return from_edge_list(n, [(j, i) for j in range(n) for i in range(n)])


def _target_links(n: int, edge_fraction: float) -> int:
    return int(math.floor(edge_fraction * n * (n - 1) + 0.5))


def gen_random_strongly_connected(n: int, edge_fraction: float, seed: int) -> Digraph:
    """Random strongly connected digraph with a prescribed share of the n(n-1) links.

    A directed cycle through a random permutation guarantees strong
    connectivity; the remaining links are drawn uniformly without replacement
    from the unused ordered pairs.
    """
    if not 0.0 < edge_fraction <= 1.0:
        raise ValueError(f"edge_fraction must lie in (0, 1], got {edge_fraction}")
    if n == 1:
        return from_edge_list(1, [])
    total = _target_links(n, edge_fraction)
    if total < n:
        raise ValueError(
            f"edge_fraction={edge_fraction} gives {total} links, a spanning cycle on n={n} needs {n}"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    cycle = {(int(perm[k]), int(perm[(k + 1) % n])) for k in range(n)}
    rest = [(j, i) for j in range(n) for i in range(n) if j != i and (j, i) not in cycle]
    pick = rng.choice(len(rest), size=total - n, replace=False) if total > n else []
    extra = [rest[k] for k in sorted(int(k) for k in pick)]
    return from_edge_list(n, sorted(cycle) + extra)


def parse_graph_spec(spec: str, seed: int = 0) -> Digraph:
    """Build a graph from a compact string.

    Accepted forms: ``ring:N``, ``uring:N`` (bidirectional ring),
    ``complete:N``, ``rand:N:FRAC[:SEED]``, ``file:PATH`` and ``sym:<spec>``
    which symmetrizes any of the others.
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "sym":
            return parse_graph_spec(rest, seed).symmetrized()
        if kind == "ring":
            return gen_ring(int(rest))
        if kind == "uring":
            return gen_ring(int(rest)).symmetrized()
        if kind == "complete":
            return gen_complete(int(rest))
        if kind == "rand":
            parts = rest.split(":")
            if len(parts) not in (2, 3):
                raise ValueError("expected rand:N:FRAC[:SEED]")
            s = int(parts[2]) if len(parts) == 3 else seed
            return gen_random_strongly_connected(int(parts[0]), float(parts[1]), s)
        if kind == "file":
            return read_edge_list(rest)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad graph spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown graph spec {spec!r}")


def write_edge_list(g: Digraph, path) -> None:
    """First line ``n``, then one ``j i`` pair per link; self-loops are implied."""
    lines = [str(g.n)] + [f"{j} {i}" for j, i in sorted(g.edges) if j != i]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> Digraph:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 1:
        raise ValueError(f"{path}: first line must hold the node count")
    n = int(rows[0][0])
    edges = []
    for k, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ValueError(f"{path}:{k}: expected 'j i'")
        edges.append((int(row[0]), int(row[1])))
    return from_edge_list(n, edges)
