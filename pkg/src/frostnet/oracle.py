"""Ground truth and verification: centralized optimum, gradient checks, rate fits,
and the 3x3 step-size certificate for FROST."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .problems import Objective, QuadraticObjective
from .weights import StochasticMatrix, contraction_estimate, perron_left


class OracleError(RuntimeError):
    pass


def solve_centralized(
    obj: Objective,
    tol: float = 1e-12,
    max_iter: int = 200_000,
    step: float | None = None,
    closed_form: bool = True,
) -> np.ndarray:
    """Minimize ``F`` to ``||grad F|| <= tol`` by gradient descent.

    The step starts at ``1/l`` (or ``step``) and is halved whenever a trial
    step decreases neither ``F`` nor the gradient norm. Quadratics return
    their closed-form minimizer unless ``closed_form`` is false.
    """
    if closed_form and isinstance(obj, QuadraticObjective):
        return obj.optimum()
    t = 1.0 / obj.smoothness.l if step is None else float(step)
    x = np.zeros(obj.p)
    f, g = obj.F(x), obj.grad_F(x)
    gn = float(np.linalg.norm(g))
    for _ in range(max_iter):
        if gn <= tol:
            return x
        x_try = x - t * g
        f_try, g_try = obj.F(x_try), obj.grad_F(x_try)
        gn_try = float(np.linalg.norm(g_try))
        if f_try >= f and gn_try >= gn:
            t *= 0.5
            continue
        x, f, g, gn = x_try, f_try, g_try, gn_try
    if gn <= tol:
        return x
    raise OracleError(f"centralized solve hit max_iter={max_iter} with ||grad F|| = {gn:.3e}")


def check_gradient(obj: Objective, points, h: float = 1e-6) -> float:
    """Largest central-difference error of the analytic gradients.

    Each point is an ``(n, p)`` stack or a single ``p``-vector shared by all
    agents. Errors are per agent ``||fd_i - g_i||_inf / max(||g_i||_inf, 1)``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    worst = 0.0
    for pt in points:
        X = np.array(np.broadcast_to(np.asarray(pt, dtype=float), (obj.n, obj.p)))
        an = obj.grads(X)
        fd = np.empty_like(an)
        for j in range(obj.p):
            e = np.zeros(obj.p)
            e[j] = h
            fd[:, j] = (obj.values(X + e) - obj.values(X - e)) / (2 * h)
        err = np.abs(fd - an).max(axis=1) / np.maximum(np.abs(an).max(axis=1), 1.0)
        worst = max(worst, float(err.max()))
    return worst


def centralized_contraction_factor(alpha: float, mu: float, l: float) -> float:
    return max(abs(1 - alpha * mu), abs(1 - alpha * l))


def check_centralized_contraction(
    obj: Objective, x_star, alpha: float, trials: int = 100, seed: int = 0
) -> bool:
    """Sample ``x`` around ``x*`` and test one gradient step contracts by ``sigma_F``."""
    l, mu = obj.smoothness.l, obj.smoothness.mu
    if not 0 < alpha < 2 / l:
        raise ValueError(f"alpha={alpha} outside (0, 2/l) = (0, {2 / l})")
    sigma_f = centralized_contraction_factor(alpha, mu, l)
    rng = np.random.default_rng(seed)
    x_star = np.asarray(x_star, dtype=float)
    for _ in range(trials):
        u = rng.standard_normal(obj.p)
        u /= np.linalg.norm(u)
        x = x_star + 10 ** rng.uniform(-3, 1) * u
        lhs = np.linalg.norm(x - alpha * obj.grad_F(x) - x_star)
        rhs = sigma_f * np.linalg.norm(x - x_star)
        if lhs > rhs * (1 + 1e-12) + 1e-15:
            return False
    return True


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float
    window: tuple[int, int]
    slope: float


def fit_linear_rate(residuals, burn_in: float = 0.1, floor: float = 1e-13, min_points: int = 20) -> RateFit:
    """Least-squares line through ``(k, log r_k)`` after a burn-in; ``rate = exp(slope)``."""
    r = np.asarray(residuals, dtype=float)
    start = int(math.floor(burn_in * len(r)))
    ks = np.arange(start, len(r))
    vals = r[start:]
    keep = np.isfinite(vals) & (vals > floor)
    ks, vals = ks[keep], vals[keep]
    if len(ks) < min_points:
        raise OracleError(f"need {min_points} residuals above {floor:g} after burn-in, have {len(ks)}")
    logs = np.log(vals)
    slope, icept = np.polyfit(ks, logs, 1)
    ss_res = float(((logs - (slope * ks + icept)) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 or ss_res <= 1e-24 * max(ss_tot, 1.0) else 1.0 - ss_res / ss_tot
    return RateFit(rate=math.exp(slope), r_squared=r2, window=(int(ks[0]), int(ks[-1])), slope=float(slope))


@dataclass(frozen=True, eq=False)
class CertificateConstants:
    """Network and objective constants of the FROST step-size analysis.

    The analysis works in a norm where ``A - 1 pi^T`` contracts; here every
    norm is the 2-norm (``c = d = 1``) and the suprema over ``k`` are
    measured along ``A^k``. Certificates built from these are advisory.
    """

    n: int
    l: float
    mu: float
    pi: np.ndarray
    sigma: float
    tau: float
    eps: float
    y: float
    y_tilde: float
    r: float
    c: float = 1.0
    d: float = 1.0

    @property
    def a(self) -> tuple[float, ...]:
        n, l, c, d = self.n, self.l, self.c, self.d
        eps, yt, tau, y = self.eps, self.y_tilde, self.tau, self.y
        return (
            c * d * eps * n * l,
            d * eps * n * l,
            d * d * eps,
            c * n * l,
            y * c,
            eps * yt * l * tau * c * d,
            c * d * n * l * l * eps * yt,
            d * n * l * l * eps * yt,
            d * d * eps * l * yt,
        )


def estimate_certificate_constants(A: StochasticMatrix, l: float, mu: float, horizon: int = 100_000) -> CertificateConstants:
    n = A.n
    a = A.entries
    pi = perron_left(A, tol=1e-15, max_iter=max(horizon, 100 * n))
    sigma = contraction_estimate(A, perron=pi)
    y_inf = np.outer(np.ones(n), pi)
    tau = float(np.linalg.norm(a - np.eye(n), 2))
    eps = float(np.linalg.norm(np.eye(n) - y_inf, 2))
    yk = np.eye(n)
    y_sup, yt_sup, r_sup = 1.0, 1.0, 0.0
    for k in range(1, horizon + 1):
        yk = a @ yk
        y_sup = max(y_sup, float(np.linalg.norm(yk, 2)))
        yt_sup = max(yt_sup, float((1.0 / np.diag(yk)).max()))
        gap = float(np.linalg.norm(yk - y_inf, 2))
        if sigma > 0:
            r_sup = max(r_sup, gap / sigma**k) if sigma**k > 1e-300 else r_sup
        if gap < 1e-15:
            break
    return CertificateConstants(n=n, l=l, mu=mu, pi=pi, sigma=sigma, tau=tau, eps=eps,
                             y=y_sup, y_tilde=yt_sup, r=r_sup)


def _pi_dot_alpha(consts: CertificateConstants, alphas) -> tuple[float, float]:
    al = np.asarray(alphas, dtype=float)
    if al.ndim == 0:
        al = np.full(consts.n, float(al))
    if (al < 0).any():
        raise ValueError("step sizes must be nonnegative")
    return float(consts.pi @ al), float(al.max())


def build_certificate_matrix(consts: CertificateConstants, alphas) -> tuple[np.ndarray, float]:
    """Assemble the 3x3 error-propagation matrix ``J_alpha`` and its spectral radius.

    ``alphas`` is a per-agent vector or a scalar applied to every agent.
    """
    if not 0 < consts.sigma < 1:
        raise ValueError(f"need 0 < sigma < 1, got {consts.sigma}")
    pta, abar = _pi_dot_alpha(consts, alphas)
    limit = 1.0 / (consts.n * consts.l)
    if pta >= limit:
        raise ValueError(f"regime violated: pi^T alpha = {pta:.6g} >= 1/(n l) = {limit:.6g}")
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = consts.a
    s = consts.sigma
    lam = 1.0 - consts.mu * consts.n * pta
    J = np.array([
        [s + a1 * abar, a2 * abar, a3 * abar],
        [a4 * abar, lam, a5 * abar],
        [a6 + a7 * abar, a8 * abar, s + a9 * abar],
    ])
    rho = float(np.abs(np.linalg.eigvals(J)).max())
    return J, rho


def delta_recipe(consts: CertificateConstants, delta3: float = 1.0, shrink: float = 0.5, inflate: float = 2.0) -> np.ndarray:
    """Positive ``(d1, d2, d3)``: ``d1`` a fraction ``shrink`` of its upper limit,
    ``d2`` a factor ``inflate`` above its lower limit."""
    if not (0 < shrink < 1 and inflate > 1 and delta3 > 0):
        raise ValueError("need 0 < shrink < 1, inflate > 1, delta3 > 0")
    if consts.mu <= 0:
        raise ValueError("the recipe needs mu > 0")
    a = consts.a
    d1 = shrink * (1 - consts.sigma) * delta3 / a[5]
    d2 = inflate * (a[3] * d1 + a[4] * delta3) / (consts.mu * consts.n * consts.pi.min())
    return np.array([d1, d2, delta3])


def step_size_bound(consts: CertificateConstants, delta) -> float:
    """Largest admissible step for the certificate ``J delta < delta``."""
    d1, d2, d3 = delta
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = consts.a
    s = consts.sigma
    return min(
        d1 * (1 - s) / (a1 * d1 + a2 * d2 + a3 * d3),
        ((1 - s) * d3 - d1 * a6) / (a7 * d1 + a8 * d2 + a9 * d3),
        1.0 / (consts.n * consts.l),
    )


def certificate_holds(J: np.ndarray, delta) -> bool:
    """Elementwise ``J delta < delta`` with positive ``delta``; implies ``rho(J) < 1``."""
    delta = np.asarray(delta, dtype=float)
    return bool((delta > 0).all() and (J @ delta < delta).all())
