import json

import pytest

from incvote.cli import main


def write_config(tmp_path, name="cfg.json", **overrides):
    d = {
        "graph": {"type": "complete", "n": 2},
        "initial": {"type": "explicit", "opinions": [0, 1]},
        "process": {"variant": "async-edge"},
        "trials": 2000,
        "seed": 11,
    }
    d.update(overrides)
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return p


def test_simulate_writes_summary_and_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, outputs=["trials_csv"])
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
    b1 = (out1 / "summary.json").read_bytes()
    assert b1 == (out2 / "summary.json").read_bytes()
    summary = json.loads(b1)
    assert summary["completed"] == 2000
    assert abs(summary["win_freq"]["0"] - 0.5) < 0.05
    trials = (out1 / "trials.csv").read_text().splitlines()
    assert trials[0] == "trial,winner,consensus_step,extreme_death_step"
    assert len(trials) == 2001


def test_simulate_worker_count_invariance(tmp_path):
    cfg = write_config(tmp_path)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a),
                 "--workers", "1"]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b),
                 "--workers", "3"]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


def test_simulate_seed_override_changes_output(tmp_path):
    cfg = write_config(tmp_path)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["simulate", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["simulate", "--config", str(cfg), "--out", str(b),
                 "--seed", "999"]) == 0
    assert (a / "summary.json").read_bytes() != (b / "summary.json").read_bytes()


def test_exit_code_2_on_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"graph": [,}')
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "column" in err


def test_exit_code_2_on_bad_config(tmp_path):
    cfg = write_config(tmp_path, trials=0)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_exit_code_3_on_all_incomplete(tmp_path):
    cfg = write_config(
        tmp_path,
        graph={"type": "path", "n": 12},
        initial={"type": "ordered-path", "i0": 4, "j0": 4},
        process={"variant": "async-edge", "max_steps": 3},
        trials=10)
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 3
    # the partial report is still written
    summary = json.loads((out / "summary.json").read_text())
    assert summary["incomplete"] == 10


def test_predict_two_value(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "p"
    assert main(["predict", "--config", str(cfg), "--out", str(out)]) == 0
    pred = json.loads((out / "prediction.json").read_text())
    assert pred["regime"] == "two-value"
    assert pred["distribution"] == {"0": 0.5, "1": 0.5}


def test_predict_expander_and_path(tmp_path):
    cfg = write_config(
        tmp_path, name="kn.json",
        graph={"type": "complete", "n": 300},
        initial={"type": "counts", "counts": {"1": 75, "2": 75, "3": 75, "4": 75}},
        process={"variant": "sync-vertex", "engine": "counts"})
    out = tmp_path / "pk"
    assert main(["predict", "--config", str(cfg), "--out", str(out)]) == 0
    pred = json.loads((out / "prediction.json").read_text())
    assert pred["regime"] == "expander"
    assert pred["c_exact"] == [5, 2]
    assert pred["distribution"] == {"2": 0.5, "3": 0.5}
    cfgp = write_config(
        tmp_path, name="path.json",
        graph={"type": "path", "n": 25},
        initial={"type": "ordered-path", "i0": 5, "j0": 20},
        process={"variant": "async-edge"})
    outp = tmp_path / "pp"
    assert main(["predict", "--config", str(cfgp), "--out", str(outp)]) == 0
    predp = json.loads((outp / "prediction.json").read_text())
    assert predp["regime"] == "ordered-path"
    assert predp["distribution"] == {"0": 0.04, "1": 0.32, "2": 0.64}


def test_solve_small_chain(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "s"
    assert main(["solve", "--config", str(cfg), "--out", str(out),
                 "--format", "csv"]) == 0
    payload = json.loads((out / "solve.json").read_text())
    assert payload["states"] == 3
    assert payload["probabilities"] == {"0": 0.5, "1": 0.5}
    assert (out / "chain.csv").read_text().splitlines()[0] == "row,col,prob"


def test_solve_rejects_oversized_chain(tmp_path):
    cfg = write_config(
        tmp_path,
        graph={"type": "complete", "n": 8},
        initial={"type": "random", "values": [0, 1, 2, 3]},
        process={"variant": "async-edge", "chain_cap": 50})
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_verify_martingale_cli(tmp_path):
    out = tmp_path / "vm"
    assert main(["verify-martingale", "--out", str(out), "--cases", "30",
                 "--generalized-cases", "5", "--seed", "4"]) == 0
    rep = json.loads((out / "martingale.json").read_text())
    assert rep["all_exact_zero"] is True
    assert rep["cases"] == 30


def test_verify_drift_cli(tmp_path):
    out = tmp_path / "vd"
    assert main(["verify-drift", "--out", str(out), "--random-vectors", "100"]) == 0
    rep = json.loads((out / "drift.json").read_text())
    assert rep["all_exact"] is True


def test_verify_path_cli(tmp_path):
    out = tmp_path / "vp"
    assert main(["verify-path", "--out", str(out)]) == 0
    rep = json.loads((out / "path.json").read_text())
    assert rep["ok"] is True
    assert rep["closed_form_max_dev"] <= 1e-9
    assert rep["full_chain_max_dev"] <= 1e-9


def test_check_graph_cli(tmp_path):
    # np = 200 so that two disjoint delta*n sets fit (delta = 5/sqrt(np))
    out = tmp_path / "cg"
    assert main(["check-graph", "--n", "1000", "--p", "0.2", "--seed", "2",
                 "--pairs", "20", "--sets", "20", "--out", str(out)]) == 0
    rep = json.loads((out / "check_graph.json").read_text())
    assert rep["connected"] is True
    assert rep["p1"]["degree_band_ok"] is True
    assert rep["p2"]["within_band"] == 20
    assert rep["p3"]["bound_i_ok"] == 20


def test_reproduce_unknown_name(tmp_path):
    assert main(["reproduce", "nope", "--out", str(tmp_path)]) == 2


def test_reproduce_lemma_suite(tmp_path):
    out = tmp_path / "ls"
    assert main(["reproduce", "lemma-suite", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["ok"] is True
    assert rep["martingale"]["all_exact_zero"] is True
    assert rep["drift"]["all_exact"] is True


def test_workers_env_default(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    monkeypatch.setenv("INCVOTE_WORKERS", "2")
    out = tmp_path / "env"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    base = tmp_path / "base"
    monkeypatch.delenv("INCVOTE_WORKERS")
    assert main(["simulate", "--config", str(cfg), "--out", str(base)]) == 0
    assert (out / "summary.json").read_bytes() == (base / "summary.json").read_bytes()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "incvote" in capsys.readouterr().out
