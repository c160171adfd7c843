import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frostnet.digraph import gen_ring
from frostnet.oracle import (
    OracleError,
    build_certificate_matrix,
    centralized_contraction_factor,
    certificate_holds,
    check_centralized_contraction,
    check_gradient,
    delta_recipe,
    estimate_certificate_constants,
    fit_linear_rate,
    solve_centralized,
    step_size_bound,
)
from frostnet.problems import Objective, gen_logistic_data, logistic_objective, quadratic_suite
from frostnet.weights import row_stochastic_uniform


class _BrokenGradient(Objective):
    def __init__(self):
        self.n, self.p = 1, 2

    def values(self, X):
        return (X**2).sum(axis=1)

    def grads(self, X):
        return 3 * X


def test_closed_form_matches_iterative_solve():
    q = quadratic_suite(6, 3, 2)
    assert np.abs(solve_centralized(q, closed_form=False) - q.optimum()).max() < 1e-11


def test_logistic_optimum_has_vanishing_gradient():
    obj = logistic_objective(gen_logistic_data(4, 10, 3, 0.5, 0))
    x = solve_centralized(obj)
    assert np.linalg.norm(obj.grad_F(x)) <= 1e-12


def test_solver_reports_non_convergence():
    obj = logistic_objective(gen_logistic_data(4, 10, 3, 0.0, 0))
    with pytest.raises(OracleError):
        solve_centralized(obj, max_iter=3)


def test_check_gradient_flags_wrong_gradient():
    assert check_gradient(_BrokenGradient(), [np.ones(2)]) > 0.1


@settings(max_examples=30, deadline=None)
@given(rate=st.floats(0.5, 0.999), scale=st.floats(1e-3, 1e3))
def test_rate_fit_recovers_geometric_rate(rate, scale):
    r = scale * rate ** np.arange(200.0)
    r = r[r > 1e-12]
    if len(r) < 30:
        return
    fit = fit_linear_rate(r)
    assert fit.rate == pytest.approx(rate, rel=1e-9)
    assert fit.r_squared > 1 - 1e-9


def test_sublinear_residuals_fit_poorly():
    fit = fit_linear_rate(1.0 / np.arange(1, 5001))
    assert fit.r_squared < 0.99


def test_rate_fit_needs_points():
    with pytest.raises(OracleError):
        fit_linear_rate([1.0, 0.5, 0.25])


def test_rate_fit_ignores_floor():
    r = np.concatenate([0.5 ** np.arange(40.0), np.zeros(20)])
    assert fit_linear_rate(r).rate == pytest.approx(0.5, rel=1e-12)


def test_centralized_contraction():
    q = quadratic_suite(5, 3, 0)
    l, mu = q.smoothness.l, q.smoothness.mu
    assert centralized_contraction_factor(1 / l, mu, l) == pytest.approx(1 - mu / l)
    for a in (0.1 / l, 1 / l, 1.9 / l):
        assert check_centralized_contraction(q, q.optimum(), a)
    with pytest.raises(ValueError):
        check_centralized_contraction(q, q.optimum(), 2.5 / l)


def test_contraction_check_catches_wrong_optimum():
    q = quadratic_suite(5, 3, 0)
    assert not check_centralized_contraction(q, q.optimum() + 1.0, 1 / q.smoothness.l)


@pytest.fixture(scope="module")
def ring5():
    q = quadratic_suite(5, 4, 0)
    c = estimate_certificate_constants(row_stochastic_uniform(gen_ring(5)), q.smoothness.l, q.smoothness.mu)
    return c


def test_certificate_constants(ring5):
    assert ring5.sigma == pytest.approx(np.cos(np.pi / 5), abs=1e-10)
    assert ring5.y_tilde >= 1 and ring5.y >= 1 and ring5.r > 0
    assert np.abs(ring5.pi - 0.2).max() < 1e-14


def test_certificate_below_bound(ring5):
    delta = delta_recipe(ring5)
    bound = step_size_bound(ring5, delta)
    assert 0 < bound <= 1 / (ring5.n * ring5.l)
    for frac in np.linspace(0.05, 0.95, 10):
        J, rho = build_certificate_matrix(ring5, frac * bound)
        assert certificate_holds(J, delta) and rho < 1


def test_zero_step_radius_is_one(ring5):
    J, rho = build_certificate_matrix(ring5, 0.0)
    assert rho == 1.0


def test_regime_violation_rejected(ring5):
    with pytest.raises(ValueError, match="regime"):
        build_certificate_matrix(ring5, 1.0 / (ring5.n * ring5.l))
    with pytest.raises(ValueError):
        build_certificate_matrix(ring5, -1.0)


def test_certificate_requires_positive_delta():
    assert not certificate_holds(np.zeros((3, 3)), [1.0, 0.0, 1.0])
