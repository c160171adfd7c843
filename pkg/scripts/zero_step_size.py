"""Only one agent takes a positive step; the rest use zero. One trace per active agent."""
import argparse
from pathlib import Path

from frostnet.harness import ExperimentConfig, build_setup, default_grid, tune_step_size


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", default="ring:5")
    ap.add_argument("--problem", default="quadratic")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--outdir", default="out/zero_step")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = ExperimentConfig(graph=args.graph, problem=args.problem, seed=args.seed)
    setup = build_setup(cfg)
    for i in range(setup.graph.n):
        alpha, tr = tune_step_size(cfg, default_grid(), setup, active=[i])
        fit = tr.rate_fit()
        path = out / f"active_{i}.csv"
        tr.to_csv(path)
        print(f"agent {i}: alpha={alpha:.4g} iters={tr.iterations} rate={fit.rate:.5f} r2={fit.r_squared:.5f} -> {path}")


if __name__ == "__main__":
    main()
