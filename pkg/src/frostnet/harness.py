"""Experiment orchestration: build a run from a flat config, iterate, record traces."""
from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .algorithms import (
    ALGORITHMS,
    NetworkState,
    StepSizes,
    WeightKindError,
    frost_tracking_error,
    mass_error,
    tracker_sum_error,
)
from .digraph import Digraph, is_strongly_connected, parse_graph_spec
from .oracle import OracleError, RateFit, fit_linear_rate, solve_centralized
from .problems import Objective, gen_logistic_data, logistic_objective, quadratic_suite
from .weights import StochasticMatrix, build_weights, contraction_estimate, perron_left

DIVERGENCE_FACTOR = 1e3
PLATEAU_WINDOW = 1000
PLATEAU_REL_CHANGE = 1e-4
TUNE_START_BUDGET = 1000


class ExperimentError(RuntimeError):
    """A run could not produce a usable trace (oracle failure, every tuning run diverged)."""


def default_seed() -> int:
    return int(os.environ.get("FROSTNET_SEED", "0"))


@dataclass
class ExperimentConfig:
    graph: str = "rand:10:0.3"
    alg: str = "frost"
    weights: str = "auto"
    problem: str = "quadratic"
    p: int = 0
    samples: int = 20
    lam: float = 0.1
    problem_seed: int = -1
    alpha: str = "auto"
    schedule: str = "constant"
    step_seed: int = -1
    iters: int = 50_000
    target: float = 1e-10
    cadence: int = 10
    x0: str = "zeros"
    seed: int = field(default_factory=default_seed)
    out: str = ""


CONFIG_HELP = {
    "graph": "graph spec: ring:N, uring:N, complete:N, rand:N:FRAC[:SEED], file:PATH, sym:<spec>",
    "alg": "algorithm: " + ", ".join(ALGORITHMS),
    "weights": "weight kind: auto, row, column, doubly, row+column",
    "problem": "objective: quadratic or logistic",
    "p": "decision dimension (quadratic) or feature count (logistic); 0 = 4 / 10",
    "samples": "logistic samples per agent",
    "lam": "logistic regularizer",
    "problem_seed": "seed for problem data; -1 = use seed",
    "alpha": "step size: auto (0.3/(n l)), a scalar, or a comma-separated per-agent list",
    "schedule": "constant or diminishing (alpha/(k+1))",
    "step_seed": "if >= 0, draw per-agent steps uniformly on [0, alpha] with this seed",
    "iters": "iteration budget",
    "target": "stop once the residual is at or below this",
    "cadence": "record invariant diagnostics every this many iterations",
    "x0": "initial iterate: zeros or random",
    "seed": "global seed (fallback: FROSTNET_SEED, else 0)",
    "out": "output CSV path",
}


def _coerce(name: str, raw):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return str(raw)


def config_from_mapping(values: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = base or ExperimentConfig()
    return replace(cfg, **{k: _coerce(k, v) for k, v in values.items()})


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    for num, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ValueError(f"{path}:{num}: expected key = value")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def gen_uncoordinated_steps(alpha_max: float, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform draws on ``[0, alpha_max]``, redrawn if all vanish."""
    if alpha_max <= 0:
        raise ValueError("alpha_max must be positive")
    rng = np.random.default_rng(seed)
    while True:
        draws = rng.uniform(0.0, alpha_max, size=n)
        if (draws > 0).any():
            return draws


@dataclass(eq=False)
class Setup:
    graph: Digraph
    weights: dict[str, StochasticMatrix]
    obj: Objective
    x_star: np.ndarray
    steps: StepSizes
    x0: np.ndarray
    pi: np.ndarray | None = None


def build_objective(cfg: ExperimentConfig, n: int) -> Objective:
    pseed = cfg.seed if cfg.problem_seed < 0 else cfg.problem_seed
    if cfg.problem == "quadratic":
        return quadratic_suite(n, cfg.p or 4, pseed)
    if cfg.problem == "logistic":
        return logistic_objective(gen_logistic_data(n, cfg.samples, cfg.p or 10, cfg.lam, pseed))
    raise ValueError(f"unknown problem {cfg.problem!r}")


def _weight_kinds(cfg: ExperimentConfig) -> tuple[str, ...]:
    try:
        alg = ALGORITHMS[cfg.alg]
    except KeyError:
        raise ValueError(f"unknown algorithm {cfg.alg!r}; choose from {', '.join(ALGORITHMS)}") from None
    if cfg.weights == "auto":
        return alg.weights
    asked = tuple(cfg.weights.split("+"))
    if asked != alg.weights:
        need = {"row": "row-stochastic", "column": "column-stochastic", "doubly": "doubly-stochastic"}
        wanted = " and ".join(need[k] for k in alg.weights)
        raise WeightKindError(f"{cfg.alg} requires {wanted} weights")
    return asked


def build_steps(cfg: ExperimentConfig, n: int, l: float) -> StepSizes:
    if cfg.alpha == "auto":
        alphas = np.full(n, 0.3 / (n * l))
    else:
        parts = [float(v) for v in cfg.alpha.split(",")]
        if len(parts) == 1:
            alphas = np.full(n, parts[0])
        elif len(parts) == n:
            alphas = np.array(parts)
        else:
            raise ValueError(f"alpha list has {len(parts)} entries for {n} agents")
    if cfg.step_seed >= 0:
        alphas = gen_uncoordinated_steps(float(alphas.max()), n, cfg.step_seed)
    steps = StepSizes(alphas, cfg.schedule)
    if not (steps.alphas > 0).any():
        raise ValueError("at least one step size must be positive")
    return steps


def build_setup(cfg: ExperimentConfig, obj: Objective | None = None, x_star=None) -> Setup:
    """Validate ``cfg`` and assemble graph, weights, objective, optimum and steps."""
    kinds = _weight_kinds(cfg)
    g = parse_graph_spec(cfg.graph, cfg.seed)
    if not is_strongly_connected(g):
        raise ValueError(f"graph {cfg.graph!r} is not strongly connected")
    weights = {k: build_weights(g, k) for k in kinds}
    if obj is None:
        obj = build_objective(cfg, g.n)
    if obj.n != g.n:
        raise ValueError(f"objective has {obj.n} agents but the graph has {g.n}")
    if x_star is None:
        try:
            x_star = solve_centralized(obj)
        except OracleError as exc:
            raise ExperimentError(f"oracle: {exc}") from exc
    steps = build_steps(cfg, g.n, obj.smoothness.l)
    if cfg.x0 == "zeros":
        x0 = np.zeros((g.n, obj.p))
    elif cfg.x0 == "random":
        x0 = np.random.default_rng(cfg.seed).standard_normal((g.n, obj.p))
    else:
        raise ValueError(f"x0 must be zeros or random, got {cfg.x0!r}")
    pi = None
    if cfg.alg == "frost":
        pi = perron_left(weights["row"], tol=1e-15, max_iter=max(10**6, 100 * g.n))
    return Setup(g, weights, obj, np.asarray(x_star, dtype=float), steps, x0, pi)


@dataclass(eq=False)
class Trace:
    alg: str
    residuals: list[float]
    track_err: dict[int, float]
    mass_err: dict[int, float]
    status: str  # "target", "budget" or "diverged"
    final_estimate: np.ndarray
    x_star: np.ndarray
    target: float
    wall_time: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals) - 1

    @property
    def final_residual(self) -> float:
        return self.residuals[-1]

    @property
    def iters_to_target(self) -> int | None:
        for k, r in enumerate(self.residuals):
            if r <= self.target:
                return k
        return None

    def consensus_point(self) -> np.ndarray:
        return self.final_estimate.mean(axis=0)

    def max_track_err(self) -> float:
        return max(self.track_err.values(), default=0.0)

    def max_mass_err(self) -> float:
        return max(self.mass_err.values(), default=0.0)

    def is_plateau(self, window: int = PLATEAU_WINDOW, rel: float = PLATEAU_REL_CHANGE) -> bool:
        """Stalled above target: relative change below ``rel`` over the last ``window`` iterations."""
        if self.status != "budget" or len(self.residuals) <= window:
            return False
        end, before = self.residuals[-1], self.residuals[-1 - window]
        return abs(before - end) < rel * end

    def rate_fit(self) -> RateFit:
        return fit_linear_rate(self.residuals)

    def to_csv(self, path) -> None:
        def fmt(v):
            return "" if v is None else f"{v:.17g}"

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "residual", "track_err", "mass_err"])
            for k, r in enumerate(self.residuals):
                w.writerow([k, fmt(r), fmt(self.track_err.get(k)), fmt(self.mass_err.get(k))])


def residual(est: np.ndarray, x_star: np.ndarray) -> float:
    """Mean over agents of the per-agent 2-norm error."""
    return float(np.linalg.norm(est - x_star, axis=1).mean())


def _diagnose(alg: str, s: NetworkState, setup: Setup) -> tuple[float | None, float | None]:
    if alg == "frost":
        rows = np.abs(s.y_vec.sum(axis=1) - 1).max()
        return frost_tracking_error(s, setup.pi), float(rows)
    if alg == "row-sublinear":
        return None, float(np.abs(s.y_vec.sum(axis=1) - 1).max())
    if alg in ("ab", "gt-ds"):
        return tracker_sum_error(s), None
    if alg == "add-opt":
        return tracker_sum_error(s), mass_error(s)
    if alg == "subgradient-push":
        return None, mass_error(s)
    return None, None


def run_experiment(cfg: ExperimentConfig, setup: Setup | None = None) -> Trace:
    """Iterate ``cfg.alg`` until the residual target, the budget, or divergence."""
    if setup is None:
        setup = build_setup(cfg)
    alg = ALGORITHMS[cfg.alg]
    mats = [setup.weights[k] for k in alg.weights]
    obj = setup.obj
    t0 = time.perf_counter()
    s = alg.init(*mats, obj, setup.x0)
    res = [residual(alg.estimate(s), setup.x_star)]
    track, mass = {}, {}
    ceiling = DIVERGENCE_FACTOR * max(res[0], 1e-300)

    def record(state):
        te, me = _diagnose(cfg.alg, state, setup)
        if te is not None:
            track[state.k] = te
        if me is not None:
            mass[state.k] = me

    record(s)
    status = "target" if res[0] <= cfg.target else "budget"
    k = 0
    while status == "budget" and k < cfg.iters:
        s = alg.step(s, *mats, setup.steps, obj)
        k = s.k
        r = residual(alg.estimate(s), setup.x_star)
        res.append(r)
        if not math.isfinite(r) or r > ceiling:
            status = "diverged"
            break
        if k % cfg.cadence == 0:
            record(s)
        if r <= cfg.target:
            status = "target"
    if k % cfg.cadence and status != "diverged":
        record(s)
    return Trace(
        alg=cfg.alg,
        residuals=res,
        track_err=track,
        mass_err=mass,
        status=status,
        final_estimate=np.array(alg.estimate(s)),
        x_star=setup.x_star,
        target=cfg.target,
        wall_time=time.perf_counter() - t0,
    )


def _rank(alpha: float, tr: Trace):
    hit = tr.iters_to_target
    if hit is None:
        return (math.inf, tr.final_residual, alpha)
    return (hit, 0.0, alpha)


def tune_step_size(
    cfg: ExperimentConfig, grid, setup: Setup | None = None, active=None
) -> tuple[float, Trace]:
    """Identical step for all agents minimizing iterations-to-target; ties go to the smaller step.

    With ``active`` given, only those agents take the step and the rest use zero.

    Budgets grow geometrically up to ``cfg.iters``: a run that reaches the
    target within budget ``B`` beats every run that does not, so the first
    budget with any hit already holds the winner. Unstable steps on bounded
    gradients oscillate instead of diverging, and this keeps them cheap.
    """
    grid = sorted({float(a) for a in grid})
    if not grid or grid[0] <= 0:
        raise ValueError("grid must be non-empty and positive")
    base = replace(cfg, alpha=repr(grid[0]), step_seed=-1)
    if setup is None:
        setup = build_setup(base)
    n = setup.graph.n
    mask = np.ones(n)
    if active is not None:
        mask = np.zeros(n)
        mask[list(active)] = 1.0
    budget = min(TUNE_START_BUDGET, cfg.iters)
    while True:
        results = []
        for a in grid:
            run_setup = replace(setup, steps=StepSizes(a * mask, cfg.schedule))
            tr = run_experiment(replace(base, alpha=repr(a), iters=budget), run_setup)
            if tr.status != "diverged":
                results.append((a, tr))
        if not results:
            raise ExperimentError(f"every step size in the grid diverged for {cfg.alg}")
        if budget >= cfg.iters or any(tr.iters_to_target is not None for _, tr in results):
            return min(results, key=lambda item: _rank(*item))
        budget = min(4 * budget, cfg.iters)


def default_grid(lo: float = 1e-3, hi: float = 1.0, num: int = 31) -> list[float]:
    return [float(v) for v in np.geomspace(lo, hi, num)]


COMPARISON_HEADER = ["algorithm", "iters_to_target", "rate", "r2", "final_residual"]


def summarize(tr: Trace) -> dict:
    hit = tr.iters_to_target
    if hit is None:
        hit = "diverged" if tr.status == "diverged" else ("plateau" if tr.is_plateau() else "budget")
    try:
        fit = tr.rate_fit()
        rate, r2 = fit.rate, fit.r_squared
    except OracleError:
        rate = r2 = math.nan
    return {"algorithm": tr.alg, "iters_to_target": hit, "rate": rate, "r2": r2,
            "final_residual": tr.final_residual}


def compare_algorithms(cfgs, out=None) -> tuple[list[dict], list[Trace]]:
    """Run configs sharing graph and objective against one centralized optimum."""
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("nothing to compare")
    first = build_setup(cfgs[0])
    for c in cfgs[1:]:
        if (c.graph, c.problem, c.p, c.samples, c.lam, c.problem_seed, c.seed) != (
            cfgs[0].graph, cfgs[0].problem, cfgs[0].p, cfgs[0].samples, cfgs[0].lam,
            cfgs[0].problem_seed, cfgs[0].seed,
        ):
            raise ValueError("compared configs must share graph and objective")
    traces = []
    for c in cfgs:
        setup = first if c is cfgs[0] else build_setup(c, obj=first.obj, x_star=first.x_star)
        traces.append(run_experiment(c, setup))
    rows = [summarize(t) for t in traces]
    if out:
        write_comparison(rows, out)
    return rows, traces


def write_comparison(rows, path) -> None:
    def fmt(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_HEADER)
        for row in rows:
            w.writerow([fmt(row[h]) for h in COMPARISON_HEADER])


@dataclass(eq=False)
class SweepResult:
    fraction: float
    graph: Digraph
    sigma_hat: float
    trace: Trace
    fit: RateFit | None


def sparsity_sweep(n: int, fractions, seed: int, template: ExperimentConfig) -> list[SweepResult]:
    """One run per random graph ``rand:n:fraction:seed``; reports the fitted rate of each."""
    out = []
    for frac in fractions:
        cfg = replace(template, graph=f"rand:{n}:{frac}:{seed}")
        setup = build_setup(cfg)
        tr = run_experiment(cfg, setup)
        try:
            fit = tr.rate_fit()
        except OracleError:
            fit = None
        row = build_weights(setup.graph, "row")
        out.append(SweepResult(float(frac), setup.graph, contraction_estimate(row), tr, fit))
    return out
