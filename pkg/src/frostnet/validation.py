"""Runtime property checks bundled for ``frostnet validate``.

Each suite is a list of small, fast checks returning ``(name, passed, detail)``.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from . import algorithms as alg
from .digraph import from_edge_list, gen_random_strongly_connected, gen_ring, is_strongly_connected
from .oracle import (
    build_certificate_matrix,
    certificate_holds,
    check_centralized_contraction,
    check_gradient,
    delta_recipe,
    estimate_certificate_constants,
    fit_linear_rate,
    solve_centralized,
    step_size_bound,
)
from .problems import gen_logistic_data, logistic_objective, quadratic_suite
from .weights import (
    column_stochastic_uniform,
    contraction_estimate,
    doubly_stochastic_metropolis,
    perron_left,
    row_stochastic_uniform,
)


def _reachable(adj_out, start):
    seen = {start}
    todo = deque([start])
    while todo:
        v = todo.popleft()
        for w in adj_out[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def _bfs_strong(g) -> bool:
    fwd = [list(nb) for nb in g.out_neighbors]
    rev = [list(nb) for nb in g.in_neighbors]
    return len(_reachable(fwd, 0)) == g.n and len(_reachable(rev, 0)) == g.n


def digraph_suite():
    out = []
    gens = [gen_random_strongly_connected(n, f, s) for n, f, s in [(8, 0.3, 1), (20, 0.1, 2), (50, 0.1, 3)]]
    out.append(("generated graphs strongly connected (Tarjan and BFS agree)",
                all(is_strongly_connected(g) and _bfs_strong(g) for g in gens), ""))
    out.append(("generator deterministic per seed",
                gen_random_strongly_connected(30, 0.2, 7).edges == gen_random_strongly_connected(30, 0.2, 7).edges, ""))
    out.append(("self-loops on every node", all((i, i) in g.edges for g in gens for i in range(g.n)), ""))
    out.append(("single edge 0->1 not strongly connected", not is_strongly_connected(from_edge_list(2, [(0, 1)])), ""))
    return out


def weights_suite():
    out = []
    g = gen_random_strongly_connected(12, 0.25, 4)
    A, B = row_stochastic_uniform(g), column_stochastic_uniform(g)
    out.append(("row sums of A", np.abs(A.entries.sum(1) - 1).max() <= 1e-12, ""))
    out.append(("column sums of B", np.abs(B.entries.sum(0) - 1).max() <= 1e-12, ""))
    pi = perron_left(A)
    res = np.abs(pi @ A.entries - pi).max()
    out.append(("left Perron residual", res < 1e-11, f"{res:.2e}"))
    sig = contraction_estimate(A)
    dense = np.sort(np.abs(np.linalg.eigvals(A.entries)))[-2]
    out.append(("contraction estimate vs dense eigenvalues", abs(sig - dense) < 1e-8, f"{sig:.12f} vs {dense:.12f}"))
    W = doubly_stochastic_metropolis(gen_ring(6).symmetrized())
    out.append(("Metropolis weights doubly stochastic",
                np.abs(W.entries.sum(0) - 1).max() <= 1e-12 and np.abs(W.entries.sum(1) - 1).max() <= 1e-12, ""))
    ring = row_stochastic_uniform(gen_ring(8))
    s8 = contraction_estimate(ring)
    ks = np.arange(1, 201)
    y_inf = np.outer(np.ones(8), ring.perron_left)
    norms, P = [], np.eye(8)
    for _ in ks:
        P = ring.entries @ P
        norms.append(np.linalg.norm(P - y_inf, 2))
    slope = np.polyfit(ks, np.log(norms), 1)[0]
    out.append(("geometric decay of A^k toward 1 pi^T", slope <= np.log(s8) + 0.05, f"slope {slope:.4f}"))
    return out


def problems_suite():
    out = []
    obj = logistic_objective(gen_logistic_data(4, 6, 3, 0.1, 0))
    rng = np.random.default_rng(0)
    err = check_gradient(obj, [rng.standard_normal(obj.p) for _ in range(5)])
    out.append(("logistic gradient vs central differences", err <= 1e-5, f"{err:.2e}"))
    q = quadratic_suite(5, 3, 1)
    xs = solve_centralized(q, closed_form=False)
    out.append(("quadratic closed form vs iterative solve", np.abs(xs - q.optimum()).max() <= 1e-10, ""))
    a, b = rng.standard_normal((2, obj.p))
    gap = (obj.grad_F(a) - obj.grad_F(b)) @ (a - b)
    d2 = float((a - b) @ (a - b))
    out.append(("curvature bracketed by mu and l",
                obj.smoothness.mu * d2 - 1e-12 <= gap <= obj.smoothness.l * d2 + 1e-12, ""))
    return out


def algorithms_suite():
    out = []
    g = gen_random_strongly_connected(6, 0.4, 2)
    A, B = row_stochastic_uniform(g), column_stochastic_uniform(g)
    obj = quadratic_suite(6, 2, 3)
    pi = perron_left(A, tol=1e-15, max_iter=10**6)
    steps = alg.StepSizes.uniform(0.002, 6)
    s = alg.frost_init(A, obj, np.zeros((6, 2)))
    worst, power_gap, P = 0.0, 0.0, np.eye(6)
    for _ in range(300):
        s = alg.frost_step(s, A, steps, obj)
        P = A.entries @ P
        worst = max(worst, alg.frost_tracking_error(s, pi))
        power_gap = max(power_gap, np.abs(s.y_vec - P).max())
    out.append(("FROST weighted tracking identity", worst <= 1e-10, f"{worst:.2e}"))
    out.append(("FROST eigenvector states equal A^k", power_gap <= 1e-10, f"{power_gap:.2e}"))
    s = alg.push_sum_init(B, np.arange(12.0).reshape(6, 2))
    for _ in range(500):
        s = alg.push_sum_step(s, B)
    out.append(("push-sum mass conserved", alg.mass_error(s) <= 1e-12, ""))
    out.append(("push-sum reaches the average", np.abs(s.z - np.arange(12.0).reshape(6, 2).mean(0)).max() <= 1e-10, ""))
    s = alg.ab_init(A, B, obj, np.zeros((6, 2)))
    worst = 0.0
    for _ in range(200):
        s = alg.ab_step(s, A, B, steps, obj)
        worst = max(worst, alg.tracker_sum_error(s))
    out.append(("AB tracker sum equals gradient sum", worst <= 1e-12, f"{worst:.2e}"))
    return out


def oracle_suite():
    out = []
    r = fit_linear_rate(2.0 ** -np.arange(60))
    out.append(("rate fit on 2^-k", abs(r.rate - 0.5) < 1e-12 and r.r_squared > 1 - 1e-12, ""))
    q = quadratic_suite(4, 3, 0)
    l = q.smoothness.l
    ok = all(check_centralized_contraction(q, q.optimum(), a * 1 / l, trials=50) for a in (0.1, 1.0, 1.9))
    out.append(("centralized contraction holds", ok, ""))
    A = row_stochastic_uniform(gen_ring(5))
    c = estimate_certificate_constants(A, l, q.smoothness.mu)
    d = delta_recipe(c)
    bound = step_size_bound(c, d)
    good = True
    for f in (0.1, 0.5, 0.9):
        J, rho = build_certificate_matrix(c, f * bound)
        good &= certificate_holds(J, d) and rho < 1
    out.append(("step-size certificate below the bound", good, f"bound {bound:.3e}"))
    out.append(("zero step gives spectral radius 1", build_certificate_matrix(c, 0.0)[1] == 1.0, ""))
    return out


SUITES = {
    "digraph": digraph_suite,
    "weights": weights_suite,
    "problems": problems_suite,
    "algorithms": algorithms_suite,
    "oracle": oracle_suite,
}


def run_suites(name: str = "all"):
    names = list(SUITES) if name == "all" else [name]
    results = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}; choose all or one of {', '.join(SUITES)}")
        results.extend((n, *row) for row in SUITES[n]())
    return results
