"""Synchronous-round engines for FROST and the baseline methods.

Each engine is an ``*_init`` producing a :class:`NetworkState` and a pure
``*_step`` mapping iteration ``k`` to ``k + 1``: every agent reads its
in-neighbors' iteration-``k`` values and all agents commit together.
States are stacked arrays, row ``i`` belonging to agent ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .problems import Objective
from .weights import StochasticMatrix


class WeightKindError(ValueError):
    pass


class EngineInvariantError(RuntimeError):
    """Raised when a state quantity that theory keeps positive is not."""


@dataclass(frozen=True, eq=False)
class NetworkState:
    k: int
    x: np.ndarray
    y_vec: np.ndarray | None = None
    y_grad: np.ndarray | None = None
    z: np.ndarray | None = None
    v: np.ndarray | None = None
    last_grad: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class StepSizes:
    """Per-agent step sizes, either held constant or scaled by ``1/(k+1)``."""

    alphas: np.ndarray
    schedule: str = "constant"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alphas, dtype=float))
        object.__setattr__(self, "alphas", a)
        if (a < 0).any() or not np.isfinite(a).all():
            raise ValueError("step sizes must be finite and nonnegative")
        if self.schedule not in ("constant", "diminishing"):
            raise ValueError(f"unknown schedule {self.schedule!r}")

    @classmethod
    def uniform(cls, alpha: float, n: int, schedule: str = "constant") -> StepSizes:
        return cls(np.full(n, float(alpha)), schedule)

    @property
    def alpha_bar(self) -> float:
        return float(self.alphas.max())

    def at(self, k: int) -> np.ndarray:
        if self.schedule == "diminishing":
            return self.alphas / (k + 1)
        return self.alphas


def _require(m: StochasticMatrix, kinds: tuple[str, ...], alg: str) -> None:
    if m.kind not in kinds:
        label = {"row": "row-stochastic", "column": "column-stochastic", "doubly": "doubly-stochastic"}
        raise WeightKindError(f"{alg} requires {label[kinds[0]]} weights, got {m.kind}")


def _check_x0(obj: Objective, x0) -> np.ndarray:
    x = np.array(x0, dtype=float)
    if x.shape != (obj.n, obj.p):
        raise ValueError(f"x0 has shape {x.shape}, objective expects {(obj.n, obj.p)}")
    return x


def _check_mass(v: np.ndarray, k: int) -> None:
    if (v <= 0).any():
        raise EngineInvariantError(f"push-sum mass became nonpositive at iteration {k}")


# FROST and the sublinear row-stochastic method


def frost_init(A: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(A, ("row", "doubly"), "frost")
    x = _check_x0(obj, x0)
    if A.n != obj.n:
        raise ValueError("weights and objective disagree on the agent count")
    g = obj.grads(x)
    return NetworkState(k=0, x=x, y_vec=np.eye(obj.n), z=g.copy(), last_grad=g)


def frost_step(s: NetworkState, A: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    """One FROST round.

    ``Y <- A Y``; ``x <- A x - diag(alpha) z``;
    ``z <- A z + g(x_new)/diag(Y_new) - g(x_old)/diag(Y_old)``.
    """
    _require(A, ("row", "doubly"), "frost")
    a = A.entries
    d_old = np.diag(s.y_vec)
    y_new = a @ s.y_vec
    d_new = np.diag(y_new)
    if (d_new <= 0).any():
        raise EngineInvariantError(f"eigenvector estimate diagonal nonpositive at iteration {s.k + 1}")
    x_new = a @ s.x - steps.at(s.k)[:, None] * s.z
    g_new = obj.grads(x_new)
    z_new = a @ s.z + g_new / d_new[:, None] - s.last_grad / d_old[:, None]
    return NetworkState(k=s.k + 1, x=x_new, y_vec=y_new, z=z_new, last_grad=g_new)


def row_sublinear_init(A: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(A, ("row", "doubly"), "row-sublinear")
    return NetworkState(k=0, x=_check_x0(obj, x0), y_vec=np.eye(obj.n))


def row_sublinear_step(s: NetworkState, A: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    """DGD over row-stochastic weights, gradients divided by the own eigenvector estimate."""
    _require(A, ("row", "doubly"), "row-sublinear")
    d = np.diag(s.y_vec)
    if (d <= 0).any():
        raise EngineInvariantError(f"eigenvector estimate diagonal nonpositive at iteration {s.k}")
    a = A.entries
    x_new = a @ s.x - steps.at(s.k)[:, None] * obj.grads(s.x) / d[:, None]
    return NetworkState(k=s.k + 1, x=x_new, y_vec=a @ s.y_vec)


# doubly-stochastic baselines


def dgd_init(W: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(W, ("doubly",), "dgd")
    return NetworkState(k=0, x=_check_x0(obj, x0))


def dgd_step(s: NetworkState, W: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    _require(W, ("doubly",), "dgd")
    x_new = W.entries @ s.x - steps.at(s.k)[:, None] * obj.grads(s.x)
    return NetworkState(k=s.k + 1, x=x_new)


def gt_ds_init(W: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(W, ("doubly",), "gt-ds")
    x = _check_x0(obj, x0)
    g = obj.grads(x)
    return NetworkState(k=0, x=x, y_grad=g.copy(), last_grad=g)


def gt_ds_step(s: NetworkState, W: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    _require(W, ("doubly",), "gt-ds")
    w = W.entries
    x_new = w @ s.x - steps.at(s.k)[:, None] * s.y_grad
    g_new = obj.grads(x_new)
    y_new = w @ s.y_grad + g_new - s.last_grad
    return NetworkState(k=s.k + 1, x=x_new, y_grad=y_new, last_grad=g_new)


# column-stochastic (push-sum) family


def push_sum_init(B: StochasticMatrix, x0) -> NetworkState:
    _require(B, ("column", "doubly"), "push-sum")
    x = np.array(x0, dtype=float)
    return NetworkState(k=0, x=x, z=x.copy(), v=np.ones(x.shape[0]))


def push_sum_step(s: NetworkState, B: StochasticMatrix) -> NetworkState:
    _require(B, ("column", "doubly"), "push-sum")
    b = B.entries
    v = b @ s.v
    _check_mass(v, s.k + 1)
    x = b @ s.x
    return NetworkState(k=s.k + 1, x=x, z=x / v[:, None], v=v)


def subgradient_push_init(B: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(B, ("column", "doubly"), "subgradient-push")
    x = _check_x0(obj, x0)
    return NetworkState(k=0, x=x, z=x.copy(), v=np.ones(obj.n), last_grad=obj.grads(x))


def subgradient_push_step(s: NetworkState, B: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    _require(B, ("column", "doubly"), "subgradient-push")
    b = B.entries
    v = b @ s.v
    _check_mass(v, s.k + 1)
    x = b @ s.x - steps.at(s.k)[:, None] * s.last_grad
    z = x / v[:, None]
    return NetworkState(k=s.k + 1, x=x, z=z, v=v, last_grad=obj.grads(z))


def add_opt_init(B: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(B, ("column", "doubly"), "add-opt")
    x = _check_x0(obj, x0)
    g = obj.grads(x)
    return NetworkState(k=0, x=x, z=x.copy(), v=np.ones(obj.n), y_grad=g.copy(), last_grad=g)


def add_opt_step(s: NetworkState, B: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    _require(B, ("column", "doubly"), "add-opt")
    b = B.entries
    v = b @ s.v
    _check_mass(v, s.k + 1)
    x = b @ s.x - steps.at(s.k)[:, None] * s.y_grad
    z = x / v[:, None]
    g_new = obj.grads(z)
    y = b @ s.y_grad + g_new - s.last_grad
    return NetworkState(k=s.k + 1, x=x, z=z, v=v, y_grad=y, last_grad=g_new)


# row + column


def ab_init(A: StochasticMatrix, B: StochasticMatrix, obj: Objective, x0) -> NetworkState:
    _require(A, ("row", "doubly"), "ab")
    _require(B, ("column", "doubly"), "ab")
    x = _check_x0(obj, x0)
    g = obj.grads(x)
    return NetworkState(k=0, x=x, y_grad=g.copy(), last_grad=g)


def ab_step(s: NetworkState, A: StochasticMatrix, B: StochasticMatrix, steps: StepSizes, obj: Objective) -> NetworkState:
    _require(A, ("row", "doubly"), "ab")
    _require(B, ("column", "doubly"), "ab")
    if A.graph is not None and B.graph is not None and A.graph != B.graph:
        raise ValueError("ab needs both weight matrices on the same graph")
    x_new = A.entries @ s.x - steps.at(s.k)[:, None] * s.y_grad
    g_new = obj.grads(x_new)
    y_new = B.entries @ s.y_grad + g_new - s.last_grad
    return NetworkState(k=s.k + 1, x=x_new, y_grad=y_new, last_grad=g_new)


# registry used by the harness


@dataclass(frozen=True)
class Algorithm:
    name: str
    weights: tuple[str, ...]  # kinds consumed, in argument order
    init: Callable
    step: Callable
    uses_ratio: bool = False  # estimate is z = x / v rather than x
    linear: bool = True  # converges exactly with a constant step

    def estimate(self, s: NetworkState) -> np.ndarray:
        return s.z if self.uses_ratio else s.x


ALGORITHMS: dict[str, Algorithm] = {
    a.name: a
    for a in (
        Algorithm("frost", ("row",), frost_init, frost_step),
        Algorithm("ab", ("row", "column"), ab_init, ab_step),
        Algorithm("add-opt", ("column",), add_opt_init, add_opt_step, uses_ratio=True),
        Algorithm(
            "subgradient-push", ("column",), subgradient_push_init, subgradient_push_step,
            uses_ratio=True, linear=False,
        ),
        Algorithm("dgd", ("doubly",), dgd_init, dgd_step, linear=False),
        Algorithm("gt-ds", ("doubly",), gt_ds_init, gt_ds_step),
        Algorithm("row-sublinear", ("row",), row_sublinear_init, row_sublinear_step, linear=False),
    )
}


# invariant diagnostics


def frost_tracking_error(s: NetworkState, pi: np.ndarray) -> float:
    """Relative gap in ``pi^T z_k = pi^T diag(Y_k)^{-1} grad f(x_k)``."""
    scaled = s.last_grad / np.diag(s.y_vec)[:, None]
    lhs = pi @ s.z
    rhs = pi @ scaled
    scale = float(pi @ np.linalg.norm(scaled, axis=1))
    return float(np.linalg.norm(lhs - rhs) / max(scale, np.finfo(float).tiny))


def tracker_sum_error(s: NetworkState) -> float:
    """Relative gap between the tracker sum and the current gradient sum."""
    scale = float(np.linalg.norm(s.last_grad, axis=1).sum())
    gap = np.linalg.norm(s.y_grad.sum(axis=0) - s.last_grad.sum(axis=0))
    return float(gap / max(scale, np.finfo(float).tiny))


def mass_error(s: NetworkState) -> float:
    return float(abs(s.v.sum() - s.v.shape[0]))
