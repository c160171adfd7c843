"""Command-line frontend: ``frostnet {run,tune,compare,sweep,graph-gen,validate}``.

Exit status: 0 success, 1 usage or configuration error, 2 experiment failure.
Every flag ``--some-key`` has a config-file twin ``some_key = value``.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace

from .algorithms import EngineInvariantError, WeightKindError
from .digraph import parse_graph_spec, write_edge_list
from .harness import (
    CONFIG_HELP,
    ExperimentConfig,
    ExperimentError,
    build_setup,
    compare_algorithms,
    config_from_mapping,
    default_grid,
    read_config_file,
    run_experiment,
    sparsity_sweep,
    summarize,
    tune_step_size,
)
from .oracle import OracleError
from .validation import run_suites
from .weights import PerronError, build_weights, contraction_estimate

COMMANDS = ("run", "tune", "compare", "sweep", "graph-gen", "validate")

# keys used by individual commands, defaults as strings
COMMAND_KEYS = {
    "grid": ("default", "tune/compare: comma-separated steps, or 'default' (31 log-spaced in [1e-3, 1])"),
    "algs": ("frost,ab,add-opt", "compare: comma-separated algorithms"),
    "fractions": ("0.1,0.13,0.16", "sweep: comma-separated link fractions"),
    "sweep_n": ("50", "sweep: number of agents"),
    "suite": ("all", "validate: all, digraph, weights, problems, algorithms or oracle"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def all_keys() -> list[str]:
    return [f.name for f in fields(ExperimentConfig)] + list(COMMAND_KEYS)


def _epilog() -> str:
    lines = ["config keys (file: 'key = value'; flag: --key with '_' as '-'):"]
    for key, text in CONFIG_HELP.items():
        lines.append(f"  {key:14s} --{key.replace('_', '-'):16s} {text}")
    for key, (default, text) in COMMAND_KEYS.items():
        lines.append(f"  {key:14s} --{key.replace('_', '-'):16s} {text} [default {default}]")
    lines.append("exit status: 0 ok, 1 usage/config error, 2 experiment failure")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="frostnet",
        description="Decentralized optimization over directed graphs.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="FILE", help="flat key = value file; flags override it")
    for key in all_keys():
        help_text = CONFIG_HELP.get(key) or COMMAND_KEYS[key][1]
        parser.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="V", help=help_text)
    return parser


def _floats(text: str, key: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{key} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ValueError(f"{key} is empty")
    return vals


def resolve(argv) -> tuple[str, ExperimentConfig, dict]:
    """Parse argv into (command, experiment config, command keys)."""
    ns = build_parser().parse_args(argv)
    values = read_config_file(ns.config) if ns.config else {}
    unknown = set(values) - set(all_keys())
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in all_keys():
        v = getattr(ns, key)
        if v is not None:
            values[key] = v
    extra = {k: values.pop(k, default) for k, (default, _) in COMMAND_KEYS.items()}
    return ns.command, config_from_mapping(values), extra


def _grid(extra) -> list[float]:
    return default_grid() if extra["grid"] == "default" else _floats(extra["grid"], "grid")


def _print_summary(row: dict) -> None:
    print(
        f"{row['algorithm']}: iters_to_target={row['iters_to_target']} "
        f"rate={row['rate']:.6g} r2={row['r2']:.6g} final_residual={row['final_residual']:.3e}"
    )


def _cmd_run(cfg, extra) -> int:
    tr = run_experiment(cfg)
    _print_summary(summarize(tr))
    if cfg.out:
        tr.to_csv(cfg.out)
        print(f"trace written to {cfg.out}")
    if tr.status == "diverged":
        print(f"run: {cfg.alg} diverged at iteration {tr.iterations}", file=sys.stderr)
        return 2
    return 0


def _cmd_tune(cfg, extra) -> int:
    alpha, tr = tune_step_size(cfg, _grid(extra))
    print(f"tuned alpha for {cfg.alg}: {alpha:.6g}")
    _print_summary(summarize(tr))
    if cfg.out:
        tr.to_csv(cfg.out)
        print(f"trace written to {cfg.out}")
    return 0


def _cmd_compare(cfg, extra) -> int:
    algs = [a.strip() for a in extra["algs"].split(",") if a.strip()]
    if not algs:
        raise ValueError("algs is empty")
    cfgs = [replace(cfg, alg=a, weights="auto") for a in algs]
    if extra["grid"] != "default" or cfg.alpha == "tune":
        grid = _grid(extra)
        shared = build_setup(cfgs[0]) if cfg.alpha != "tune" else None
        tuned = []
        for c in cfgs:
            probe = replace(c, alpha=repr(grid[0]))
            setup = build_setup(probe) if shared is None else build_setup(probe, shared.obj, shared.x_star)
            if shared is None:
                shared = setup
            alpha, _ = tune_step_size(probe, grid, setup)
            print(f"tuned alpha for {c.alg}: {alpha:.6g}")
            tuned.append(replace(c, alpha=repr(alpha)))
        cfgs = tuned
    rows, _ = compare_algorithms(cfgs, out=cfg.out or None)
    for row in rows:
        _print_summary(row)
    if cfg.out:
        print(f"comparison written to {cfg.out}")
    return 0


def _cmd_sweep(cfg, extra) -> int:
    fractions = _floats(extra["fractions"], "fractions")
    n = int(extra["sweep_n"])
    results = sparsity_sweep(n, fractions, cfg.seed, cfg)
    rows = []
    for r in results:
        rate = r.fit.rate if r.fit else float("nan")
        r2 = r.fit.r_squared if r.fit else float("nan")
        hit = r.trace.iters_to_target
        print(
            f"fraction={r.fraction:g} links={r.graph.num_links} sigma_hat={r.sigma_hat:.6f} "
            f"iters_to_target={hit if hit is not None else r.trace.status} rate={rate:.6g} r2={r2:.6g}"
        )
        rows.append((r.fraction, r.graph.num_links, r.sigma_hat, hit, rate, r2))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write("fraction,links,sigma_hat,iters_to_target,rate,r2\n")
            for fr, links, sig, hit, rate, r2 in rows:
                fh.write(f"{fr:.17g},{links},{sig:.17g},{'' if hit is None else hit},{rate:.17g},{r2:.17g}\n")
        print(f"sweep written to {cfg.out}")
    return 0


def _cmd_graph_gen(cfg, extra) -> int:
    g = parse_graph_spec(cfg.graph, cfg.seed)
    sigma = contraction_estimate(build_weights(g, "row"))
    print(f"graph {cfg.graph}: n={g.n} links={g.num_links} sigma_hat={sigma:.6f}")
    if cfg.out:
        write_edge_list(g, cfg.out)
        print(f"edge list written to {cfg.out}")
    return 0


def _cmd_validate(cfg, extra) -> int:
    results = run_suites(extra["suite"])
    failed = 0
    for suite, name, ok, detail in results:
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {suite}: {name}" + (f" ({detail})" if detail else ""))
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 2


HANDLERS = {
    "run": _cmd_run,
    "tune": _cmd_tune,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "graph-gen": _cmd_graph_gen,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help") for a in argv):
        build_parser().print_help()
        return 0
    try:
        command, cfg, extra = resolve(argv)
    except (UsageError, ValueError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return HANDLERS[command](cfg, extra)
    except (ExperimentError, OracleError, EngineInvariantError, PerronError) as exc:
        print(f"{command} failed: {exc}", file=sys.stderr)
        return 2
    except (WeightKindError, ValueError, OSError) as exc:
        print(f"{command} configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
