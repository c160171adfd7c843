"""Stochastic weight matrices on a digraph, Perron vectors and contraction factors."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .digraph import Digraph

KINDS = ("row", "column", "doubly")
SUM_TOL = 1e-12


class PerronError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Dense ``n x n`` weights, ``entries[i, j]`` being what ``i`` puts on ``j``."""

    entries: np.ndarray
    kind: str
    graph: Digraph | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"weights must be square, got shape {a.shape}")
        if (a < 0).any():
            raise ValueError("weights must be nonnegative")
        if (np.diag(a) <= 0).any():
            raise ValueError("all diagonal weights must be strictly positive")
        if self.kind in ("row", "doubly"):
            err = np.abs(a.sum(axis=1) - 1).max()
            if err > SUM_TOL:
                raise ValueError(f"row sums deviate from 1 by {err:.3e}")
        if self.kind in ("column", "doubly"):
            err = np.abs(a.sum(axis=0) - 1).max()
            if err > SUM_TOL:
                raise ValueError(f"column sums deviate from 1 by {err:.3e}")
        if self.graph is not None:
            if self.graph.n != a.shape[0]:
                raise ValueError("graph size does not match weights")
            stray = (a > 0) & ~self.graph.adjacency()
            if stray.any():
                i, j = np.argwhere(stray)[0]
                raise ValueError(f"weight on ({i}, {j}) but {j} -> {i} is not an edge")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def perron_left(self) -> np.ndarray:
        return perron_left(self)

    @cached_property
    def perron_right(self) -> np.ndarray:
        return perron_right(self)

    def to_csv(self, path) -> None:
        np.savetxt(Path(path), self.entries, fmt="%.17g", delimiter=",")


def row_stochastic_uniform(g: Digraph) -> StochasticMatrix:
    """``a_ij = 1/|N_i^in|`` over in-neighbors; each receiver weighs locally."""
    a = np.zeros((g.n, g.n))
    for i, nbrs in enumerate(g.in_neighbors):
        a[i, list(nbrs)] = 1.0 / len(nbrs)
    return StochasticMatrix(a, "row", g)


def column_stochastic_uniform(g: Digraph) -> StochasticMatrix:
    """``b_ij = 1/|N_j^out|``; each sender splits its mass over its out-neighbors."""
    b = np.zeros((g.n, g.n))
    for j, nbrs in enumerate(g.out_neighbors):
        b[list(nbrs), j] = 1.0 / len(nbrs)
    return StochasticMatrix(b, "column", g)


def doubly_stochastic_metropolis(g: Digraph) -> StochasticMatrix:
    """Metropolis weights ``1/(1 + max(d_i, d_j))``; needs a symmetric graph."""
    if not g.is_symmetric():
        raise ValueError("Metropolis weights need a symmetric graph (every edge reversed too)")
    deg = [len(nb) - 1 for nb in g.in_neighbors]
    w = np.zeros((g.n, g.n))
    for j, i in g.edges:
        if i != j:
            w[i, j] = 1.0 / (1 + max(deg[i], deg[j]))
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return StochasticMatrix(w, "doubly", g)


def _power_iterate(mat: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    n = mat.shape[0]
    v = np.full(n, 1.0 / n)
    diff = math.inf
    for _ in range(max_iter):
        nxt = mat @ v
        nxt /= nxt.sum()
        diff = np.abs(nxt - v).max()
        v = nxt
        if diff < tol:
            return v
    raise PerronError(f"power iteration did not converge in {max_iter} steps (last change {diff:.3e})")


def perron_left(m: StochasticMatrix, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Positive ``pi`` with ``pi^T A = pi^T`` and unit sum, by power iteration on ``A^T``."""
    if m.kind == "column":
        raise ValueError("left Perron vector of a column-stochastic matrix is the ones vector")
    if max_iter is None:
        max_iter = 100 * m.n
    return _power_iterate(m.entries.T, tol, max_iter)


def perron_right(m: StochasticMatrix, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Positive ``pi_c`` with ``B pi_c = pi_c`` and unit sum."""
    if m.kind == "row":
        raise ValueError("right Perron vector of a row-stochastic matrix is the ones vector")
    if max_iter is None:
        max_iter = 100 * m.n
    return _power_iterate(m.entries, tol, max_iter)


def spectral_radius_power(mat: np.ndarray, squarings: int = 60) -> float:
    """Spectral radius from Gelfand's formula on normalized repeated squares.

    Vector power iteration stalls when the dominant eigenvalues form a
    complex pair (directed rings), while ``||M^N||^(1/N)`` converges for any
    spectrum; the error after ``N = 2^squarings`` is ``O(log(cond)/N)``.
    """
    m = np.array(mat, dtype=float)
    log_rho = 0.0
    scale = 1.0
    for _ in range(squarings):
        nrm = np.abs(m).max()
        if nrm == 0.0:
            return 0.0
        log_rho += math.log(nrm) * scale
        m = m / nrm
        m = m @ m
        scale /= 2
    nrm = np.abs(m).max()
    if nrm == 0.0:
        return 0.0
    return math.exp(log_rho + math.log(nrm) * scale)


def contraction_estimate(m: StochasticMatrix, perron: np.ndarray | None = None) -> float:
    """Spectral radius of ``A - 1 pi^T``, the consensus contraction factor."""
    if m.kind == "column":
        raise ValueError("contraction_estimate expects row- or doubly-stochastic weights")
    pi = m.perron_left if perron is None else perron
    deflated = m.entries - np.outer(np.ones(m.n), pi)
    sigma = spectral_radius_power(deflated)
    if sigma >= 1 - 1e-12:
        raise PerronError(f"contraction estimate {sigma} >= 1: weights are not primitive")
    return sigma


def build_weights(g: Digraph, kind: str) -> StochasticMatrix:
    """Uniform row/column weights or Metropolis doubly-stochastic weights."""
    if kind == "row":
        return row_stochastic_uniform(g)
    if kind == "column":
        return column_stochastic_uniform(g)
    if kind == "doubly":
        return doubly_stochastic_metropolis(g)
    raise ValueError(f"unknown weight kind {kind!r}")
