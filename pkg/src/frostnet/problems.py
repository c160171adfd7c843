"""Per-agent objectives ``f_i`` with analytic gradients.

Local iterates are stacked as an ``(n, p)`` array, row ``i`` belonging to
agent ``i``; ``values`` and ``grads`` evaluate every agent at its own row.
The global objective is ``F(x) = mean_i f_i(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class SmoothnessConstants:
    l: float
    mu: float

    def __post_init__(self):
        if not (self.l > 0 and 0 <= self.mu <= self.l):
            raise ValueError(f"need 0 <= mu <= l and l > 0, got l={self.l}, mu={self.mu}")


class Objective:
    n: int
    p: int
    smoothness: SmoothnessConstants

    def values(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grads(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _stack(self, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(x, dtype=float), (self.n, self.p))

    def F(self, x: np.ndarray) -> float:
        return float(self.values(self._stack(x)).mean())

    def grad_F(self, x: np.ndarray) -> np.ndarray:
        return self.grads(self._stack(x)).mean(axis=0)


class QuadraticObjective(Objective):
    """``f_i(x) = q_i/2 ||x - c_i||^2``, with a closed-form global minimizer."""

    def __init__(self, centers, curvatures):
        c = np.array(centers, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        q = np.array(curvatures, dtype=float).reshape(-1)
        if q.shape[0] != c.shape[0]:
            raise ValueError("need one curvature per center")
        if (q <= 0).any():
            raise ValueError("curvatures must be positive")
        self.centers, self.curvatures = c, q
        self.n, self.p = c.shape
        self.smoothness = SmoothnessConstants(l=float(q.max()), mu=float(q.min()))

    def values(self, X):
        d = X - self.centers
        return 0.5 * self.curvatures * np.einsum("ij,ij->i", d, d)

    def grads(self, X):
        return self.curvatures[:, None] * (X - self.centers)

    def optimum(self) -> np.ndarray:
        q = self.curvatures
        return (q[:, None] * self.centers).sum(axis=0) / q.sum()


def quadratic_objective(centers, curvatures) -> QuadraticObjective:
    return QuadraticObjective(centers, curvatures)


def quadratic_suite(n: int, p: int = 4, seed: int = 0) -> QuadraticObjective:
    """Default test problem: standard normal centers, curvatures uniform on [1, 4]."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n, p))
    curvatures = rng.uniform(1.0, 4.0, size=n)
    return QuadraticObjective(centers, curvatures)


class ZeroObjective(Objective):
    def __init__(self, n: int, p: int):
        self.n, self.p = n, p
        self.smoothness = SmoothnessConstants(l=1.0, mu=0.0)

    def values(self, X):
        return np.zeros(self.n)

    def grads(self, X):
        return np.zeros((self.n, self.p))


@dataclass(frozen=True, eq=False)
class LogisticData:
    features: list[np.ndarray]  # agent i: (m_i, p)
    labels: list[np.ndarray]  # agent i: (m_i,) with entries +-1
    lam: float

    def __post_init__(self):
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels disagree on the agent count")
        for c, y in zip(self.features, self.labels):
            if c.ndim != 2 or c.shape[0] != y.shape[0]:
                raise ValueError("each agent needs an (m_i, p) feature block and m_i labels")
            if not np.isfinite(c).all():
                raise ValueError("features must be finite")
            if not np.isin(y, (-1.0, 1.0)).all():
                raise ValueError("labels must be exactly +1 or -1")
        if self.lam < 0:
            raise ValueError("regularizer must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def p(self) -> int:
        return self.features[0].shape[1]

    def to_csv(self, path) -> None:
        p = self.p
        lines = ["agent,label," + ",".join(f"f{k + 1}" for k in range(p))]
        for i, (c, y) in enumerate(zip(self.features, self.labels)):
            for row, lab in zip(c, y):
                lines.append(f"{i},{int(lab)}," + ",".join(f"{v:.17g}" for v in row))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path, lam: float) -> LogisticData:
        raw = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        agents = raw[:, 0].astype(int)
        n = agents.max() + 1
        feats = [raw[agents == i, 2:] for i in range(n)]
        labs = [raw[agents == i, 1] for i in range(n)]
        return cls(feats, labs, lam)


def gen_logistic_data(n: int, m, p: int, lam: float, seed: int) -> LogisticData:
    """Standard normal features and fair +-1 labels; ``m`` is a count or a per-agent list."""
    counts = [int(m)] * n if np.isscalar(m) else [int(v) for v in m]
    if len(counts) != n or min(counts) < 1 or p < 1:
        raise ValueError("need n sample counts >= 1 and p >= 1")
    rng = np.random.default_rng(seed)
    total = sum(counts)
    feats = rng.standard_normal((total, p))
    labs = 2.0 * rng.integers(0, 2, size=total) - 1.0
    cuts = np.cumsum(counts)[:-1]
    return LogisticData(np.split(feats, cuts), np.split(labs, cuts), float(lam))


class LogisticObjective(Objective):
    """Regularized logistic loss over ``(w, b)``; the bias is the last coordinate.

    Agents are padded to a common sample count and masked so every
    evaluation is one vectorized pass.
    """

    def __init__(self, data: LogisticData):
        self.data = data
        self.n = data.n
        self.p = data.p + 1
        self.lam = data.lam
        mmax = max(c.shape[0] for c in data.features)
        self._C = np.zeros((self.n, mmax, self.p))
        self._y = np.zeros((self.n, mmax))
        self._mask = np.zeros((self.n, mmax))
        for i, (c, y) in enumerate(zip(data.features, data.labels)):
            k = c.shape[0]
            self._C[i, :k, :-1] = c
            self._C[i, :k, -1] = 1.0
            self._y[i, :k] = y
            self._mask[i, :k] = 1.0
        sq = (self._C**2).sum(axis=2) * self._mask
        l = self.lam + 0.25 * sq.sum(axis=1).max()
        self.smoothness = SmoothnessConstants(l=float(l), mu=float(self.lam))

    def _margins(self, X):
        # u = -y (w^T c + b)
        return -self._y * np.einsum("imp,ip->im", self._C, X)

    def values(self, X):
        u = self._margins(X)
        loss = (np.logaddexp(0.0, u) * self._mask).sum(axis=1)
        w = X[:, :-1]
        return loss + 0.5 * self.lam * np.einsum("ij,ij->i", w, w)

    def grads(self, X):
        u = self._margins(X)
        sig = np.exp(-np.logaddexp(0.0, -u))  # stable 1/(1+e^{-u})
        coef = -self._y * sig * self._mask
        g = np.einsum("im,imp->ip", coef, self._C)
        g[:, :-1] += self.lam * X[:, :-1]
        return g


def logistic_objective(data: LogisticData) -> LogisticObjective:
    return LogisticObjective(data)
