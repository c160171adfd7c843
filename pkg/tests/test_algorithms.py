import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frostnet import algorithms as alg
from frostnet.digraph import gen_random_strongly_connected, gen_ring
from frostnet.problems import quadratic_objective, quadratic_suite
from frostnet.weights import (
    build_weights,
    column_stochastic_uniform,
    doubly_stochastic_metropolis,
    perron_left,
    row_stochastic_uniform,
)

setups = st.tuples(st.integers(3, 7), st.floats(0.6, 1.0), st.integers(0, 10**5))


def brute_force_frost_step(A, Y, x, z, alphas, grad):
    """Agent-by-agent transcription with explicit neighbor sums."""
    n = A.shape[0]
    Y2, x2, z2 = np.zeros_like(Y), np.zeros_like(x), np.zeros_like(z)
    for i in range(n):
        for j in range(n):
            if A[i, j] > 0:
                Y2[i] += A[i, j] * Y[j]
                x2[i] += A[i, j] * x[j]
        x2[i] -= alphas[i] * z[i]
    g_old, g_new = grad(x), grad(x2)
    for i in range(n):
        for j in range(n):
            if A[i, j] > 0:
                z2[i] += A[i, j] * z[j]
        z2[i] += g_new[i] / Y2[i, i] - g_old[i] / Y[i, i]
    return Y2, x2, z2


@settings(max_examples=30, deadline=None)
@given(cfg=setups, a=st.floats(0.0, 0.05))
def test_frost_step_matches_brute_force(cfg, a):
    n, frac, seed = cfg
    A = row_stochastic_uniform(gen_random_strongly_connected(n, frac, seed))
    obj = quadratic_suite(n, 3, seed)
    alphas = np.random.default_rng(seed).uniform(0, a, n) if a > 0 else np.zeros(n)
    steps = alg.StepSizes(alphas)
    s = alg.frost_init(A, obj, np.random.default_rng(seed).standard_normal((n, 3)))
    for _ in range(4):
        nxt = alg.frost_step(s, A, steps, obj)
        Y2, x2, z2 = brute_force_frost_step(A.entries, s.y_vec, s.x, s.z, alphas, obj.grads)
        assert np.allclose(nxt.y_vec, Y2, rtol=1e-13, atol=1e-14)
        assert np.allclose(nxt.x, x2, rtol=1e-13, atol=1e-13)
        assert np.allclose(nxt.z, z2, rtol=1e-12, atol=1e-12)
        s = nxt


def test_frost_eigenvector_state_is_matrix_power():
    A = row_stochastic_uniform(gen_random_strongly_connected(6, 0.4, 3))
    obj = quadratic_suite(6, 2, 0)
    s = alg.frost_init(A, obj, np.zeros((6, 2)))
    steps = alg.StepSizes.uniform(0.001, 6)
    for k in range(1, 60):
        s = alg.frost_step(s, A, steps, obj)
        assert np.allclose(s.y_vec, np.linalg.matrix_power(A.entries, k), atol=1e-14)


def test_single_agent_frost_is_gradient_descent():
    obj = quadratic_objective(np.array([[1.0, -2.0]]), np.array([3.0]))
    A = row_stochastic_uniform(gen_ring(1))
    s = alg.frost_init(A, obj, np.array([[5.0, 5.0]]))
    x = np.array([5.0, 5.0])
    for _ in range(20):
        s = alg.frost_step(s, A, alg.StepSizes.uniform(0.1, 1), obj)
        x = x - 0.1 * obj.grads(x[None])[0]
        assert np.allclose(s.x[0], x, rtol=1e-14)


@settings(max_examples=20, deadline=None)
@given(cfg=setups)
def test_frost_weighted_tracking_identity(cfg):
    n, frac, seed = cfg
    A = row_stochastic_uniform(gen_random_strongly_connected(n, frac, seed))
    pi = perron_left(A, tol=1e-15, max_iter=10**6)
    obj = quadratic_suite(n, 2, seed)
    steps = alg.StepSizes(np.random.default_rng(seed).uniform(0, 0.005, n))
    s = alg.frost_init(A, obj, np.zeros((n, 2)))
    for _ in range(200):
        s = alg.frost_step(s, A, steps, obj)
        assert alg.frost_tracking_error(s, pi) <= 1e-10


def test_frost_converges_on_complete_graph():
    n = 5
    A = row_stochastic_uniform(gen_random_strongly_connected(n, 1.0, 0))
    obj = quadratic_suite(n, 3, 1)
    s = alg.frost_init(A, obj, np.zeros((n, 3)))
    for _ in range(3000):
        s = alg.frost_step(s, A, alg.StepSizes.uniform(0.01, n), obj)
    assert np.abs(s.x - obj.optimum()).max() < 1e-10


@settings(max_examples=20, deadline=None)
@given(cfg=setups)
def test_push_sum_conserves_mass_and_averages(cfg):
    n, frac, seed = cfg
    B = column_stochastic_uniform(gen_random_strongly_connected(n, frac, seed))
    x0 = np.random.default_rng(seed).standard_normal((n, 2))
    s = alg.push_sum_init(B, x0)
    for _ in range(2000):
        s = alg.push_sum_step(s, B)
        assert alg.mass_error(s) <= 1e-12
    assert np.abs(s.z - x0.mean(0)).max() <= 1e-9


@settings(max_examples=20, deadline=None)
@given(cfg=setups, name=st.sampled_from(["ab", "add-opt", "gt-ds"]))
def test_tracker_sum_equals_gradient_sum(cfg, name):
    n, frac, seed = cfg
    g = gen_random_strongly_connected(n, frac, seed)
    if name == "gt-ds":
        g = g.symmetrized()
    a = alg.ALGORITHMS[name]
    mats = [build_weights(g, k) for k in a.weights]
    obj = quadratic_suite(n, 2, seed)
    steps = alg.StepSizes(np.random.default_rng(seed).uniform(0, 0.02, n))
    s = a.init(*mats, obj, np.zeros((n, 2)))
    for _ in range(300):
        s = a.step(s, *mats, steps, obj)
        assert alg.tracker_sum_error(s) <= 1e-12


def test_dgd_reaches_its_biased_fixed_point():
    g = gen_ring(5).symmetrized()
    W = doubly_stochastic_metropolis(g)
    obj = quadratic_suite(5, 2, 4)
    a = 0.05
    Q = np.diag(obj.curvatures)
    # fixed point of x = W x - a Q (x - c)
    fixed = np.linalg.solve(np.eye(5) - W.entries + a * Q, a * Q @ obj.centers)
    s = alg.dgd_init(W, obj, np.zeros((5, 2)))
    for _ in range(5000):
        s = alg.dgd_step(s, W, alg.StepSizes.uniform(a, 5), obj)
    assert np.abs(s.x - fixed).max() < 1e-10
    assert np.abs(s.x - obj.optimum()).max() > 1e-3


def test_subgradient_push_moves_toward_optimum():
    g = gen_random_strongly_connected(5, 0.5, 2)
    B = column_stochastic_uniform(g)
    obj = quadratic_suite(5, 2, 2)
    steps = alg.StepSizes.uniform(0.2, 5, schedule="diminishing")
    s = alg.subgradient_push_init(B, obj, np.zeros((5, 2)))
    start = np.abs(s.z - obj.optimum()).max()
    for _ in range(3000):
        s = alg.subgradient_push_step(s, B, steps, obj)
    assert alg.mass_error(s) <= 1e-12
    assert np.abs(s.z - obj.optimum()).max() < 0.1 * start


def test_step_sizes():
    st_ = alg.StepSizes.uniform(0.5, 3, schedule="diminishing")
    assert np.allclose(st_.at(0), 0.5) and np.allclose(st_.at(4), 0.1)
    assert alg.StepSizes(np.array([0.0, 0.2])).alpha_bar == 0.2
    with pytest.raises(ValueError):
        alg.StepSizes(np.array([-0.1]))
    with pytest.raises(ValueError):
        alg.StepSizes(np.array([0.1]), schedule="cosine")


def test_weight_kind_mismatch_is_rejected():
    g = gen_ring(4)
    obj = quadratic_suite(4, 2, 0)
    with pytest.raises(alg.WeightKindError, match="frost requires row-stochastic weights"):
        alg.frost_init(column_stochastic_uniform(g), obj, np.zeros((4, 2)))
    with pytest.raises(alg.WeightKindError):
        alg.push_sum_init(row_stochastic_uniform(g), np.zeros((4, 2)))
    with pytest.raises(alg.WeightKindError):
        alg.dgd_init(row_stochastic_uniform(g), obj, np.zeros((4, 2)))


def test_x0_shape_checked():
    g = gen_ring(4)
    with pytest.raises(ValueError):
        alg.frost_init(row_stochastic_uniform(g), quadratic_suite(4, 2, 0), np.zeros((4, 3)))


def test_row_sublinear_matches_manual_update():
    A = row_stochastic_uniform(gen_ring(3))
    obj = quadratic_suite(3, 2, 0)
    steps = alg.StepSizes.uniform(0.1, 3, schedule="diminishing")
    s = alg.row_sublinear_init(A, obj, np.ones((3, 2)))
    Y, x = np.eye(3), np.ones((3, 2))
    for k in range(5):
        s = alg.row_sublinear_step(s, A, steps, obj)
        x = A.entries @ x - (0.1 / (k + 1)) * obj.grads(x) / np.diag(Y)[:, None]
        Y = A.entries @ Y
        assert np.allclose(s.x, x, rtol=1e-14)
