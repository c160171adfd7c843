import filecmp
from dataclasses import replace

import numpy as np
import pytest

from frostnet.algorithms import WeightKindError
from frostnet.harness import (
    COMPARISON_HEADER,
    ExperimentConfig,
    ExperimentError,
    Trace,
    build_setup,
    compare_algorithms,
    config_from_mapping,
    default_seed,
    gen_uncoordinated_steps,
    read_config_file,
    residual,
    run_experiment,
    sparsity_sweep,
    tune_step_size,
)

FAST = ExperimentConfig(graph="ring:5", alpha="0.02", iters=3000, seed=0)


def test_residual_is_mean_of_agent_norms():
    est = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
    assert residual(est, np.zeros(2)) == pytest.approx((5 + 0 + 1) / 3)


def test_run_hits_target_and_records_diagnostics():
    tr = run_experiment(FAST)
    assert tr.status == "target" and tr.final_residual <= 1e-10
    assert tr.max_track_err() <= 1e-10 and tr.max_mass_err() <= 1e-12
    assert set(range(0, tr.iterations, 10)) <= set(tr.track_err)
    assert tr.iterations in tr.track_err


def test_identical_config_gives_identical_trace_bytes(tmp_path):
    for name in ("a.csv", "b.csv"):
        run_experiment(FAST).to_csv(tmp_path / name)
    assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "iter,residual,track_err,mass_err"
    assert lines[1].split(",")[1] == f"{run_experiment(FAST).residuals[0]:.17g}"


def test_divergence_guard():
    tr = run_experiment(replace(FAST, alpha="5.0"))
    assert tr.status == "diverged"
    assert tr.residuals[-1] > 1e3 * tr.residuals[0] or not np.isfinite(tr.residuals[-1])


def test_budget_and_plateau():
    cfg = ExperimentConfig(graph="sym:ring:5", alg="dgd", alpha="0.05", iters=3000, seed=0)
    tr = run_experiment(cfg)
    assert tr.status == "budget" and tr.is_plateau() and tr.final_residual > 1e-6


def test_weight_kind_errors():
    with pytest.raises(WeightKindError, match="frost requires row-stochastic weights"):
        build_setup(replace(FAST, weights="column"))
    with pytest.raises(ValueError):
        build_setup(replace(FAST, alg="nope"))
    with pytest.raises(ValueError):
        build_setup(replace(FAST, alg="dgd"))  # directed ring has no Metropolis weights


def test_uncoordinated_steps():
    a = gen_uncoordinated_steps(0.1, 50, 2)
    assert (a >= 0).all() and (a <= 0.1).all() and a.max() > 0
    assert np.array_equal(a, gen_uncoordinated_steps(0.1, 50, 2))
    s = build_setup(replace(FAST, step_seed=3))
    assert s.steps.alphas.max() <= 0.02 and len(set(s.steps.alphas)) == 5


def test_alpha_parsing():
    s = build_setup(replace(FAST, alpha="0.01,0,0,0,0.02"))
    assert list(s.steps.alphas) == [0.01, 0, 0, 0, 0.02]
    auto = build_setup(replace(FAST, alpha="auto"))
    assert auto.steps.alphas[0] == pytest.approx(0.3 / (5 * auto.obj.smoothness.l))
    with pytest.raises(ValueError):
        build_setup(replace(FAST, alpha="0.1,0.2"))
    with pytest.raises(ValueError):
        build_setup(replace(FAST, alpha="0"))


def test_disconnected_graph_rejected(tmp_path):
    (tmp_path / "g.txt").write_text("3\n0 1\n1 2\n")
    with pytest.raises(ValueError, match="strongly connected"):
        build_setup(replace(FAST, graph=f"file:{tmp_path / 'g.txt'}"))


def test_config_file_and_mapping(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("# comment\ngraph = ring:6\nstep-seed = 4  # inline\niters=10\n")
    vals = read_config_file(path)
    assert vals == {"graph": "ring:6", "step_seed": "4", "iters": "10"}
    cfg = config_from_mapping(vals)
    assert (cfg.graph, cfg.step_seed, cfg.iters) == ("ring:6", 4, 10)
    with pytest.raises(ValueError):
        config_from_mapping({"colour": "red"})
    path.write_text("graph ring:6\n")
    with pytest.raises(ValueError):
        read_config_file(path)


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("FROSTNET_SEED", "17")
    assert default_seed() == 17 and ExperimentConfig().seed == 17
    monkeypatch.delenv("FROSTNET_SEED")
    assert ExperimentConfig().seed == 0


def test_tuning_prefers_fewest_iterations():
    grid = [0.001, 0.01, 0.02, 0.05, 10.0]
    alpha, tr = tune_step_size(FAST, grid)
    assert tr.status == "target"
    for a in grid:
        other = run_experiment(replace(FAST, alpha=repr(a)))
        if other.iters_to_target is not None:
            assert tr.iters_to_target <= other.iters_to_target


def test_tuning_with_single_active_agent():
    alpha, tr = tune_step_size(replace(FAST, iters=20000), [0.005, 0.01, 0.02, 0.04], active=[2])
    assert tr.status == "target"


def test_tuning_all_diverged():
    with pytest.raises(ExperimentError):
        tune_step_size(FAST, [50.0, 100.0])


def test_compare_shares_optimum(tmp_path):
    cfgs = [replace(FAST, alg=a, alpha="0.02") for a in ("frost", "ab", "add-opt")]
    rows, traces = compare_algorithms(cfgs, out=tmp_path / "cmp.csv")
    assert [r["algorithm"] for r in rows] == ["frost", "ab", "add-opt"]
    assert all(np.array_equal(t.x_star, traces[0].x_star) for t in traces)
    assert (tmp_path / "cmp.csv").read_text().splitlines()[0] == ",".join(COMPARISON_HEADER)
    with pytest.raises(ValueError):
        compare_algorithms([FAST, replace(FAST, graph="ring:6")])


def test_sweep_one_trace_per_fraction():
    tmpl = ExperimentConfig(alpha="0.002", iters=2000)
    res = sparsity_sweep(12, [0.2, 0.3], 1, tmpl)
    assert [r.fraction for r in res] == [0.2, 0.3]
    assert all(0 < r.sigma_hat < 1 for r in res)
    assert len(sparsity_sweep(12, [0.25], 1, tmpl)) == 1


def test_trace_properties():
    tr = Trace("frost", [1.0, 0.1, 1e-11], {}, {}, "target", np.zeros((2, 1)), np.zeros(1), 1e-10)
    assert tr.iters_to_target == 2 and tr.iterations == 2 and not tr.is_plateau()
