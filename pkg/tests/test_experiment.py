import json
import math

import numpy as np
import pytest

from incvote.experiment import (ConfigError, ExperimentConfig,
                                build_graph, build_initial_opinions,
                                compare_to_prediction, extreme_elimination_audit,
                                mean_winner_audit, run_experiment,
                                small_instance_cross_validation, wilson_interval)
from incvote.theory import Prediction, predict_expander, predict_ordered_path


def k2_config(trials=3000, seed=11, **extra):
    d = {
        "graph": {"type": "complete", "n": 2},
        "initial": {"type": "explicit", "opinions": [0, 1]},
        "process": {"variant": "async-edge"},
        "trials": trials,
        "seed": seed,
    }
    d.update(extra)
    return ExperimentConfig.from_dict(d)


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"graph": {}, "initial": {}, "process": {}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({
            "graph": {"type": "nope"}, "initial": {"type": "explicit"},
            "process": {"variant": "async-edge"}, "trials": 1, "seed": 0})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({
            "graph": {"type": "path", "n": 5},
            "initial": {"type": "explicit", "opinions": [0] * 5},
            "process": {"variant": "async-edge", "engine": "counts"},
            "trials": 1, "seed": 0})
    with pytest.raises(ConfigError):
        k2_config(trials=0)
    with pytest.raises(ConfigError):
        k2_config(outputs=["bogus"])
    with pytest.raises(ConfigError):
        k2_config(outputs=["checkpoints_csv"])  # needs a stride
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({
            "graph": {"type": "gnp", "n": 10, "p": 0.5},  # missing seed
            "initial": {"type": "explicit", "opinions": [0] * 10},
            "process": {"variant": "async-edge"}, "trials": 1, "seed": 0})


def test_build_graph_types(tmp_path):
    assert build_graph({"type": "complete", "n": 4}).m == 6
    assert build_graph({"type": "path", "n": 4}).m == 3
    assert build_graph({"type": "edges", "n": 3, "edges": [[0, 1], [1, 2]]}).m == 2
    g = build_graph({"type": "gnp", "n": 30, "p": 0.5, "seed": 1})
    path = tmp_path / "g.txt"
    g.save(path)
    g2 = build_graph({"type": "file", "path": str(path)})
    assert g2.to_edgelist_text() == g.to_edgelist_text()


def test_build_initial_variants(tmp_path):
    g = build_graph({"type": "path", "n": 10})
    x = build_initial_opinions(g, {"type": "ordered-path", "a": "0.2", "b": "0.3"}, 0)
    assert (x == [0, 0, 1, 1, 1, 1, 1, 2, 2, 2]).all()
    x2 = build_initial_opinions(g, {"type": "ordered-path", "i0": 2, "j0": 3}, 0)
    assert (x == x2).all()
    xc = build_initial_opinions(
        g, {"type": "counts", "counts": {"0": 4, "2": 6}}, 7)
    assert sorted(xc.tolist()) == [0] * 4 + [2] * 6
    xc2 = build_initial_opinions(
        g, {"type": "counts", "counts": {"0": 4, "2": 6}}, 7)
    assert (xc == xc2).all()  # same master seed, same placement
    xs = build_initial_opinions(
        g, {"type": "counts", "counts": {"0": 4, "2": 6}, "placement": "sorted"}, 7)
    assert (xs == sorted(xs.tolist())).all()
    xr = build_initial_opinions(g, {"type": "random", "values": [1, 2, 5]}, 3)
    assert set(xr.tolist()) <= {1, 2, 5}
    fpath = tmp_path / "init.txt"
    fpath.write_text("0x4\n1x6\n")
    xf = build_initial_opinions(g, {"type": "file", "path": str(fpath)}, 0)
    assert sorted(xf.tolist()) == [0] * 4 + [1] * 6
    with pytest.raises(ConfigError):
        build_initial_opinions(g, {"type": "counts", "counts": {"0": 3}}, 0)
    with pytest.raises(ConfigError):
        build_initial_opinions(g, {"type": "explicit", "opinions": [1, 2]}, 0)


def test_per_trial_placement_differs():
    g = build_graph({"type": "path", "n": 12})
    spec = {"type": "counts", "counts": {"0": 6, "1": 6}, "per_trial": True}
    a = build_initial_opinions(g, spec, 5, trial_index=0)
    b = build_initial_opinions(g, spec, 5, trial_index=1)
    assert sorted(a.tolist()) == sorted(b.tolist())
    assert (a != b).any()


def test_two_value_frequencies_and_reproducibility():
    cfg = k2_config(trials=8000)
    s = run_experiment(cfg)
    assert s.completed == 8000
    assert abs(s.win_freq[0] - 0.5) < 0.02
    lo, hi = s.wilson[0]
    assert lo < 0.5 < hi
    assert s.c_exact == (1, 2)
    # byte-identical across runs and worker counts
    assert run_experiment(cfg).to_json() == s.to_json()
    assert run_experiment(cfg, workers=4).to_json() == s.to_json()


def test_single_trial_all_equal():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "complete", "n": 5},
        "initial": {"type": "explicit", "opinions": [3] * 5},
        "process": {"variant": "sync-vertex"},
        "trials": 1, "seed": 0})
    s = run_experiment(cfg)
    assert s.win_freq == {3: 1.0}
    assert s.consensus_steps["max"] == 0
    assert s.mean_winner == 3.0


def test_winners_stay_in_initial_range():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "gnp", "n": 14, "p": 0.5, "seed": 2},
        "initial": {"type": "random", "values": [1, 2, 3, 4]},
        "process": {"variant": "async-vertex"},
        "trials": 400, "seed": 9})
    s = run_experiment(cfg)
    assert s.completed == 400
    assert set(s.win_counts) <= {1, 2, 3, 4}
    for r in s.records:
        assert r.winner in (1, 2, 3, 4)


def test_mean_winner_audit_on_k30():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "complete", "n": 30},
        "initial": {"type": "random", "values": [0, 1, 2, 3]},
        "process": {"variant": "async-vertex"},
        "trials": 4000, "seed": 21})
    s = run_experiment(cfg)
    v = mean_winner_audit(s)
    assert v.passed, v
    # explicit c agrees with the stored exact average
    v2 = mean_winner_audit(s, c=s.c_exact[0] / s.c_exact[1])
    assert v2.passed


def test_compare_to_prediction_pass_and_negative_control():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "path", "n": 25},
        "initial": {"type": "ordered-path", "i0": 5, "j0": 20},
        "process": {"variant": "async-edge", "max_steps": 1000 * 625},
        "trials": 4000, "seed": 5})
    s = run_experiment(cfg)
    good = predict_ordered_path("1/5", "4/5")
    assert compare_to_prediction(s, good).passed
    swapped = Prediction(
        distribution={0: good.distribution[2], 1: good.distribution[1],
                      2: good.distribution[0]},
        c=good.c, floor_pair=good.floor_pair, regime="ordered-path")
    assert not compare_to_prediction(s, swapped).passed
    with pytest.raises(ValueError):
        compare_to_prediction(s, predict_expander(17))


def test_extreme_elimination_audit():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "complete", "n": 200},
        "initial": {"type": "counts",
                    "counts": {"1": 40, "2": 40, "3": 40, "4": 40, "5": 40}},
        "process": {"variant": "sync-vertex", "engine": "counts"},
        "trials": 300, "seed": 14})
    s = run_experiment(cfg)
    rep = extreme_elimination_audit(s)
    assert rep["first_extreme_death"]["ceiling"] == math.ceil(3 * math.log(200))
    assert rep["first_extreme_death"]["fraction_within"] >= 0.99
    assert rep["three_consecutive"]["fraction_within"] >= 0.99
    with pytest.raises(ValueError):
        extreme_elimination_audit(s, k=2)


def test_drift_audit_fields():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "complete", "n": 100},
        "initial": {"type": "counts", "counts": {"1": 25, "2": 25, "3": 25, "4": 25}},
        "process": {"variant": "sync-vertex", "engine": "counts"},
        "trials": 400, "seed": 3, "checkpoint_stride": 10})
    s = run_experiment(cfg)
    audit = s.drift_audit
    assert audit is not None and audit["t"] == 10
    assert audit["exceed_1pct_frac"] <= 0.01


def test_incomplete_trials_reported_not_folded():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "path", "n": 12},
        "initial": {"type": "ordered-path", "i0": 4, "j0": 4},
        "process": {"variant": "async-edge", "max_steps": 5},
        "trials": 50, "seed": 1})
    s = run_experiment(cfg)
    assert s.completed == 0 and s.incomplete == 50
    assert s.win_freq == {}
    with pytest.raises(ValueError):
        mean_winner_audit(s)


def test_trials_csv_format():
    cfg = k2_config(trials=5, outputs=["trials_csv"])
    s = run_experiment(cfg)
    lines = s.trials_csv().strip().splitlines()
    assert lines[0] == "trial,winner,consensus_step,extreme_death_step"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] in ("0", "1")


def test_checkpoints_csv_emitted():
    cfg = ExperimentConfig.from_dict({
        "graph": {"type": "complete", "n": 12},
        "initial": {"type": "random", "values": [0, 1, 2]},
        "process": {"variant": "async-edge"},
        "trials": 3, "seed": 2, "checkpoint_stride": 5,
        "outputs": ["checkpoints_csv"]})
    s = run_experiment(cfg)
    assert s.checkpoints0_csv is not None
    assert s.checkpoints0_csv.splitlines()[0] == "t,S,Z_scaled,num_distinct,min_op,max_op"


def test_wilson_interval_basic():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi < 0.05
    lo1, hi1 = wilson_interval(100, 100)
    assert hi1 == pytest.approx(1.0) and lo1 > 0.95
    lo2, hi2 = wilson_interval(50, 100)
    assert lo2 < 0.5 < hi2


def test_summary_json_is_canonical():
    s = run_experiment(k2_config(trials=50))
    d = json.loads(s.to_json())
    assert d["trials"] == 50
    assert "records" not in d
    assert json.dumps(d, sort_keys=True, indent=2) + "\n" == s.to_json()


def test_small_instance_cross_validation():
    reports = small_instance_cross_validation(trials=100_000)
    assert len(reports) == 4
    for rep in reports:
        assert rep["ok"], rep
        assert rep["max_dev"] <= 0.01
