"""Monte Carlo harness: seeded trial fan-out, estimators, and audits.

Every trial draws from its own Philox stream keyed by (master seed, trial
index), and the summary is a deterministic reduction over trial indices, so
the results are byte-identical for any worker count or execution order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import graph as graph_mod
from . import kn_engine
from .dynamics import (ASYNC_VARIANTS, ProcessSpec, VARIANTS, ordered_path_opinions,
                       parse_initial_text, run_trial)
from .graph import Graph
from .oracle import build_full_process_chain, solve_absorption
from .rng import placement_rng, trial_rng
from .theory import Prediction, initial_average

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentSummary",
    "run_experiment",
    "wilson_interval",
    "compare_to_prediction",
    "ComparisonVerdict",
    "mean_winner_audit",
    "MeanWinnerVerdict",
    "extreme_elimination_audit",
    "small_instance_cross_validation",
    "TRIALS_CSV_HEADER",
]

TRIALS_CSV_HEADER = "trial,winner,consensus_step,extreme_death_step"


class ConfigError(ValueError):
    """Invalid or infeasible experiment configuration."""


_GRAPH_TYPES = ("complete", "path", "gnp", "edges", "file")
_INITIAL_TYPES = ("explicit", "ordered-path", "counts", "random", "file")
_ENGINES = ("auto", "general", "counts")


_OUTPUTS = ("trials_csv", "checkpoints_csv")


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative experiment: graph, initial state, process, trial budget."""

    graph: dict
    initial: dict
    process: dict
    trials: int
    seed: int
    checkpoint_stride: int = 0
    outputs: tuple = ()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        missing = [k for k in ("graph", "initial", "process", "trials", "seed") if k not in d]
        if missing:
            raise ConfigError(f"config missing keys: {missing}")
        unknown = [k for k in d if k not in
                   ("graph", "initial", "process", "trials", "seed",
                    "checkpoint_stride", "outputs")]
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(graph=dict(d["graph"]), initial=dict(d["initial"]),
                  process=dict(d["process"]), trials=int(d["trials"]),
                  seed=int(d["seed"]),
                  checkpoint_stride=int(d.get("checkpoint_stride", 0)),
                  outputs=tuple(d.get("outputs", ())))
        cfg.validate()
        return cfg

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.checkpoint_stride < 0:
            raise ConfigError("checkpoint_stride must be >= 0")
        bad = [o for o in self.outputs if o not in _OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}, expected subset of {_OUTPUTS}")
        if "checkpoints_csv" in self.outputs and self.checkpoint_stride <= 0:
            raise ConfigError("checkpoints_csv output needs checkpoint_stride > 0")
        gtype = self.graph.get("type")
        if gtype not in _GRAPH_TYPES:
            raise ConfigError(f"graph.type must be one of {_GRAPH_TYPES}, got {gtype!r}")
        if gtype == "gnp" and "seed" not in self.graph:
            raise ConfigError("gnp graph spec needs an explicit seed")
        itype = self.initial.get("type")
        if itype not in _INITIAL_TYPES:
            raise ConfigError(f"initial.type must be one of {_INITIAL_TYPES}, got {itype!r}")
        variant = self.process.get("variant")
        if variant not in VARIANTS:
            raise ConfigError(f"process.variant must be one of {VARIANTS}, got {variant!r}")
        engine = self.process.get("engine", "auto")
        if engine not in _ENGINES:
            raise ConfigError(f"process.engine must be one of {_ENGINES}, got {engine!r}")
        if engine == "counts":
            if gtype != "complete":
                raise ConfigError("the count engine requires a complete graph")
            if variant == "generalized":
                raise ConfigError("the count engine has no generalized variant")

    def to_dict(self) -> dict:
        return {
            "graph": dict(self.graph),
            "initial": dict(self.initial),
            "process": dict(self.process),
            "trials": self.trials,
            "seed": self.seed,
            "checkpoint_stride": self.checkpoint_stride,
            "outputs": list(self.outputs),
        }


def build_graph(gspec: dict) -> Graph:
    gtype = gspec.get("type")
    try:
        if gtype == "complete":
            return graph_mod.make_complete(int(gspec["n"]))
        if gtype == "path":
            return graph_mod.make_path(int(gspec["n"]))
        if gtype == "gnp":
            if "seed" not in gspec:
                raise ConfigError("gnp graph spec needs an explicit seed")
            return graph_mod.sample_gnp(int(gspec["n"]), float(gspec["p"]),
                                        int(gspec["seed"]))
        if gtype == "edges":
            return graph_mod.from_edges(int(gspec["n"]), gspec["edges"])
        if gtype == "file":
            return graph_mod.load(gspec["path"])
    except KeyError as exc:
        raise ConfigError(f"graph spec missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown graph type {gtype!r}")


def build_initial_opinions(g: Graph, ispec: dict, master_seed: int,
                           trial_index: int = 0) -> np.ndarray:
    """Materialize the initial opinion vector for one trial.

    Random placements draw from the placement stream; with per_trial=false
    (default) every trial shares placement stream 0.
    """
    itype = ispec.get("type")
    per_trial = bool(ispec.get("per_trial", False))
    t = trial_index if per_trial else 0
    try:
        if itype == "explicit":
            x = np.asarray(ispec["opinions"], dtype=np.int64)
        elif itype == "file":
            with open(ispec["path"]) as fh:
                x = parse_initial_text(fh.read(), g.n)
        elif itype == "ordered-path":
            if "i0" in ispec:
                i0, j0 = int(ispec["i0"]), int(ispec["j0"])
            else:
                i0 = round(Fraction(str(ispec["a"])) * g.n)
                j0 = round(Fraction(str(ispec["b"])) * g.n)
            x = ordered_path_opinions(g.n, i0, j0)
        elif itype == "counts":
            counts = {int(op): int(cnt) for op, cnt in dict(ispec["counts"]).items()}
            if sum(counts.values()) != g.n:
                raise ConfigError(f"counts sum to {sum(counts.values())}, need {g.n}")
            vals = []
            for op in sorted(counts):
                vals.extend([op] * counts[op])
            x = np.asarray(vals, dtype=np.int64)
            if ispec.get("placement", "shuffle") == "shuffle":
                placement_rng(master_seed, t).shuffle(x)
        elif itype == "random":
            values = [int(v) for v in ispec["values"]]
            if not values:
                raise ConfigError("random initial needs a nonempty values list")
            rng = placement_rng(master_seed, t)
            x = np.asarray(rng.choice(np.asarray(values, dtype=np.int64), size=g.n),
                           dtype=np.int64)
        else:
            raise ConfigError(f"unknown initial type {itype!r}")
    except KeyError as exc:
        raise ConfigError(f"initial spec missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if x.shape != (g.n,):
        raise ConfigError(f"initial state covers {x.shape[0]} vertices, need {g.n}")
    return x


def _resolve_engine(cfg: ExperimentConfig) -> str:
    engine = cfg.process.get("engine", "auto")
    if engine != "auto":
        return engine
    return "general"


def _make_spec(cfg: ExperimentConfig, seed: int = 0) -> ProcessSpec:
    p = cfg.process
    return ProcessSpec(
        variant=p["variant"],
        propensity=tuple(p["propensity"]) if p.get("propensity") is not None else None,
        seed=seed,
        max_steps=p.get("max_steps"),
        scale_exponent=int(p.get("scale_exponent", 0)),
    )


class TrialRecord(NamedTuple):
    trial: int
    winner: object
    consensus_step: object
    final_three_step: object
    final_two_step: object
    first_elim_step: object
    steps: int
    completed: bool
    c_num: int
    c_den: int
    dev: object      # |W(t_chk) - W(0)| of the variant's martingale
    dev_t: object


def _variant_dev(variant: str, g: Graph, cps: np.ndarray):
    """Martingale deviation at the first stride checkpoint (or at stopping)."""
    if cps.shape[0] < 2:
        return None, None
    row = cps[1]
    t = int(row[0])
    if t == 0:
        return None, None
    if variant == "async-edge":
        return abs(float(row[1] - cps[0][1])), t
    scale = g.n / (2.0 * g.m)
    return abs(float(row[2] - cps[0][2])) * scale, t


def _run_trial_range(cfg: ExperimentConfig, lo: int, hi: int) -> list:
    g = build_graph(cfg.graph)
    engine = _resolve_engine(cfg)
    variant = cfg.process["variant"]
    per_trial = bool(cfg.initial.get("per_trial", False))
    x_static = None if per_trial else build_initial_opinions(g, cfg.initial, cfg.seed, 0)
    stride = cfg.checkpoint_stride
    spec = _make_spec(cfg) if engine != "counts" else None
    want_cp0 = "checkpoints_csv" in cfg.outputs
    cp0_csv = None
    records = []
    for t in range(lo, hi):
        x0 = build_initial_opinions(g, cfg.initial, cfg.seed, t) if per_trial else x_static
        c = initial_average(g, x0, variant)
        rng = trial_rng(cfg.seed, t)
        if engine == "counts":
            lo_op = int(x0.min())
            width = int(x0.max()) - lo_op + 1
            counts = np.bincount((x0 - lo_op).astype(np.int64), minlength=width)
            cs = kn_engine.CountState(counts=counts, lo=lo_op)
            max_steps = cfg.process.get("max_steps")
            out = kn_engine.run_count_trial(
                cs, sync=variant == "sync-vertex", max_steps=max_steps,
                stride=stride, rng=rng)
            dev = dev_t = None
            if stride > 0 and out.trajectory_t.shape[0] >= 2 and out.trajectory_t[1] > 0:
                vals = np.arange(lo_op, lo_op + width)
                s0 = int((vals * out.trajectory_counts[0]).sum())
                s1 = int((vals * out.trajectory_counts[1]).sum())
                dev, dev_t = abs(float(s1 - s0)), int(out.trajectory_t[1])
            records.append(TrialRecord(
                trial=t, winner=out.winner, consensus_step=out.consensus_step,
                final_three_step=out.final_three_step,
                final_two_step=out.final_two_step,
                first_elim_step=out.first_elimination_step,
                steps=out.steps, completed=out.completed,
                c_num=c.numerator, c_den=c.denominator, dev=dev, dev_t=dev_t))
            if want_cp0 and t == 0:
                cp0_csv = out.trajectory_csv()
        else:
            out = run_trial(g, x0, spec, checkpoint_stride=stride, rng=rng)
            dev, dev_t = (None, None) if stride == 0 else _variant_dev(variant, g, out.checkpoints)
            records.append(TrialRecord(
                trial=t, winner=out.winner, consensus_step=out.consensus_step,
                final_three_step=out.final_three_step,
                final_two_step=out.final_two_step,
                first_elim_step=out.first_elimination_step,
                steps=out.steps, completed=out.completed,
                c_num=c.numerator, c_den=c.denominator, dev=dev, dev_t=dev_t))
            if want_cp0 and t == 0:
                cp0_csv = out.checkpoints_csv()
    return records, cp0_csv


def _worker(payload):
    cfg_dict, lo, hi = payload
    return _run_trial_range(ExperimentConfig.from_dict(cfg_dict), lo, hi)


def _percentile(sorted_vals, q):
    if not sorted_vals:
        return None
    idx = min(len(sorted_vals) - 1, int(math.ceil(q * len(sorted_vals))) - 1)
    return sorted_vals[max(idx, 0)]


def wilson_interval(count: int, n: int, z: float = 1.96):
    """Wilson 95% interval; behaves sensibly at frequencies 0 and 1."""
    if n == 0:
        return (0.0, 1.0)
    ph = count / n
    denom = 1.0 + z * z / n
    centre = ph + z * z / (2 * n)
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n))
    return ((centre - half) / denom, (centre + half) / denom)


@dataclass
class ExperimentSummary:
    """Aggregates over all trials, plus the per-trial arrays used by audits.

    to_dict() is deterministic and excludes runtime details (worker count),
    so identical configs give byte-identical JSON.
    """

    config: dict
    n: int
    k_initial: int
    variant: str
    trials: int
    completed: int
    incomplete: int
    win_counts: dict
    win_freq: dict
    wilson: dict
    mean_winner: object
    mean_winner_stderr: object
    mean_winner_minus_c: object
    stderr_winner_minus_c: object
    c_mean: float
    c_exact: object          # (num, den) when constant across trials, else None
    off_bracket_count: int
    off_bracket_freq: object
    consensus_steps: dict
    first_elim_steps: dict
    final_three_steps: dict
    drift_audit: object
    records: list = field(repr=False)
    checkpoints0_csv: object = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "n": self.n,
            "k_initial": self.k_initial,
            "variant": self.variant,
            "trials": self.trials,
            "completed": self.completed,
            "incomplete": self.incomplete,
            "win_counts": {str(k): v for k, v in sorted(self.win_counts.items())},
            "win_freq": {str(k): v for k, v in sorted(self.win_freq.items())},
            "wilson95": {str(k): list(v) for k, v in sorted(self.wilson.items())},
            "mean_winner": self.mean_winner,
            "mean_winner_stderr": self.mean_winner_stderr,
            "mean_winner_minus_c": self.mean_winner_minus_c,
            "stderr_winner_minus_c": self.stderr_winner_minus_c,
            "c_mean": self.c_mean,
            "c_exact": list(self.c_exact) if self.c_exact else None,
            "off_bracket_count": self.off_bracket_count,
            "off_bracket_freq": self.off_bracket_freq,
            "consensus_steps": self.consensus_steps,
            "first_elim_steps": self.first_elim_steps,
            "final_three_steps": self.final_three_steps,
            "drift_audit": self.drift_audit,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def trials_csv(self) -> str:
        lines = [TRIALS_CSV_HEADER]
        for r in self.records:
            w = "" if r.winner is None else str(r.winner)
            cstep = "" if r.consensus_step is None else str(r.consensus_step)
            estep = "" if r.first_elim_step is None else str(r.first_elim_step)
            lines.append(f"{r.trial},{w},{cstep},{estep}")
        return "\n".join(lines) + "\n"


def _stats_dict(vals) -> dict:
    vals = sorted(v for v in vals if v is not None)
    if not vals:
        return {"count": 0, "mean": None, "p50": None, "p90": None, "max": None}
    return {
        "count": len(vals),
        "mean": float(np.mean(vals)),
        "p50": float(_percentile(vals, 0.5)),
        "p90": float(_percentile(vals, 0.9)),
        "max": float(max(vals)),
    }


def _drift_envelope(variant: str, g: Graph, t: int, q: float = 0.01):
    """Smallest deviation whose concentration bound probability is q."""
    if t is None or t <= 0:
        return None
    if variant == "async-edge":
        denom = 2.0 * t
    elif variant == "async-vertex":
        pi_inf = float(g.degrees.max()) / (2.0 * g.m)
        denom = 2.0 * t * (g.n * pi_inf) ** 2
    else:
        pi_l2_sq = float(np.sum((g.degrees / (2.0 * g.m)) ** 2))
        denom = 2.0 * (g.n ** 2) * pi_l2_sq * t
    return math.sqrt(denom * math.log(2.0 / q))


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentSummary:
    """Run all trials and reduce deterministically by trial index."""
    cfg.validate()
    g = build_graph(cfg.graph)
    x_probe = build_initial_opinions(g, cfg.initial, cfg.seed, 0)
    k_initial = len(set(int(v) for v in x_probe))
    variant = cfg.process["variant"]
    if workers is None:
        workers = int(os.environ.get("INCVOTE_WORKERS", "1"))
    workers = max(1, min(workers, cfg.trials))
    if workers == 1:
        records, cp0_csv = _run_trial_range(cfg, 0, cfg.trials)
    else:
        chunk = math.ceil(cfg.trials / workers)
        payloads = [(cfg.to_dict(), lo, min(lo + chunk, cfg.trials))
                    for lo in range(0, cfg.trials, chunk)]
        records = []
        cp0_csv = None
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part, cp0 in pool.map(_worker, payloads):
                records.extend(part)
                if cp0 is not None:
                    cp0_csv = cp0
        records.sort(key=lambda r: r.trial)

    completed = [r for r in records if r.completed]
    nc = len(completed)
    win_counts: dict = {}
    for r in completed:
        win_counts[r.winner] = win_counts.get(r.winner, 0) + 1
    win_freq = {k: v / nc for k, v in win_counts.items()} if nc else {}
    wils = {k: wilson_interval(v, nc) for k, v in win_counts.items()}

    winners = np.array([r.winner for r in completed], dtype=float)
    cs = np.array([r.c_num / r.c_den for r in completed], dtype=float)
    c_all = {(r.c_num, r.c_den) for r in records}
    c_exact = next(iter(c_all)) if len(c_all) == 1 else None
    mean_winner = float(winners.mean()) if nc else None
    mw_stderr = float(winners.std(ddof=1) / math.sqrt(nc)) if nc > 1 else None
    diffs = winners - cs if nc else np.zeros(0)
    mean_diff = float(diffs.mean()) if nc else None
    sd_diff = float(diffs.std(ddof=1) / math.sqrt(nc)) if nc > 1 else None

    off = 0
    for r in completed:
        lo_b = r.c_num // r.c_den
        if r.winner not in (lo_b, lo_b + 1):
            off += 1

    drift_audit = None
    devs = [(r.dev, r.dev_t) for r in records if r.dev is not None]
    if devs:
        ts = {t for _, t in devs}
        t_chk = max(ts)
        vals = [d for d, _ in devs]
        eps99 = _drift_envelope(variant, g, t_chk, q=0.01)
        drift_audit = {
            "t": t_chk,
            "max_abs_dev": float(max(vals)),
            "mean_abs_dev": float(np.mean(vals)),
            "envelope_dev_at_1pct": eps99,
            "exceed_1pct_frac": float(np.mean([v >= eps99 for v in vals])) if eps99 else None,
        }

    return ExperimentSummary(
        config=cfg.to_dict(),
        n=g.n,
        k_initial=k_initial,
        variant=variant,
        trials=cfg.trials,
        completed=nc,
        incomplete=cfg.trials - nc,
        win_counts=win_counts,
        win_freq=win_freq,
        wilson=wils,
        mean_winner=mean_winner,
        mean_winner_stderr=mw_stderr,
        mean_winner_minus_c=mean_diff,
        stderr_winner_minus_c=sd_diff,
        c_mean=float(cs.mean()) if nc else float(np.mean([r.c_num / r.c_den for r in records])),
        c_exact=c_exact,
        off_bracket_count=off,
        off_bracket_freq=off / nc if nc else None,
        consensus_steps=_stats_dict([r.consensus_step for r in completed]),
        first_elim_steps=_stats_dict([r.first_elim_step for r in records]),
        final_three_steps=_stats_dict([r.final_three_step for r in records]),
        drift_audit=drift_audit,
        records=records,
        checkpoints0_csv=cp0_csv,
    )


# ---------------------------------------------------------------------------
# verdicts and audits
# ---------------------------------------------------------------------------


class ComparisonVerdict(NamedTuple):
    rows: list      # per opinion: dict(opinion, freq, predicted, z, tol, ok)
    passed: bool

    def to_dict(self) -> dict:
        return {"rows": self.rows, "passed": self.passed}


def compare_to_prediction(summary: ExperimentSummary, prediction: Prediction,
                          allowance: float = 0.02) -> ComparisonVerdict:
    """Per-opinion z-scores and a pass/fail at 3*stderr + finite-size allowance."""
    pred = {int(op): float(p) for op, p in prediction.distribution.items()}
    keys = sorted(set(pred) | set(summary.win_freq))
    if not (set(pred) & set(summary.win_freq)) and summary.win_freq:
        raise ValueError(
            f"domain mismatch: prediction over {sorted(pred)}, winners {sorted(summary.win_freq)}")
    n = summary.completed
    rows = []
    passed = True
    for op in keys:
        f = summary.win_freq.get(op, 0.0)
        p = pred.get(op, 0.0)
        stderr = max(math.sqrt(max(f * (1 - f), p * (1 - p)) / n), 1.0 / n) if n else float("inf")
        tol = 3 * stderr + allowance
        z = (f - p) / stderr if stderr > 0 else 0.0
        ok = abs(f - p) <= tol
        passed = passed and ok
        rows.append({"opinion": op, "freq": f, "predicted": p,
                     "z": z, "tol": tol, "ok": ok})
    return ComparisonVerdict(rows=rows, passed=passed)


class MeanWinnerVerdict(NamedTuple):
    mean_diff: float
    stderr: float
    z: float
    passed: bool

    def to_dict(self) -> dict:
        return {"mean_winner_minus_c": self.mean_diff, "stderr": self.stderr,
                "z": self.z, "passed": self.passed}


def mean_winner_audit(summary: ExperimentSummary, c=None) -> MeanWinnerVerdict:
    """|mean winning value - c| <= 3 stderr; the universal martingale test."""
    if summary.completed == 0:
        raise ValueError("no completed trials to audit")
    if c is None:
        diff = summary.mean_winner_minus_c
        stderr = summary.stderr_winner_minus_c
    else:
        diff = summary.mean_winner - float(c)
        stderr = summary.mean_winner_stderr
    if stderr is None or stderr == 0.0:
        return MeanWinnerVerdict(mean_diff=diff, stderr=stderr or 0.0,
                                 z=0.0 if diff == 0 else float("inf"),
                                 passed=diff == 0)
    z = diff / stderr
    return MeanWinnerVerdict(mean_diff=diff, stderr=stderr, z=z, passed=abs(z) <= 3.0)


def extreme_elimination_audit(summary: ExperimentSummary, k: int | None = None,
                              n: int | None = None) -> dict:
    """Empirical elimination speed against the 3 ln n / 3 k ln n ceilings
    (times n for the asynchronous variants)."""
    k = k if k is not None else summary.k_initial
    n = n if n is not None else summary.n
    if k < 3:
        raise ValueError("audit needs at least three initial opinions")
    is_async = summary.variant in ASYNC_VARIANTS
    scale = n if is_async else 1
    first_ceiling = math.ceil(3 * math.log(n)) * scale
    three_ceiling = math.ceil(3 * k * math.log(n)) * scale
    firsts = [r.first_elim_step for r in summary.records]
    threes = [r.final_three_step for r in summary.records]
    n_tr = len(summary.records)
    first_ok = sum(1 for v in firsts if v is not None and v <= first_ceiling)
    three_ok = sum(1 for v in threes if v is not None and v <= three_ceiling)
    return {
        "first_extreme_death": {
            "ceiling": first_ceiling,
            "fraction_within": first_ok / n_tr,
        },
        "three_consecutive": {
            "ceiling": three_ceiling,
            "fraction_within": three_ok / n_tr,
        },
        "trials": n_tr,
    }


def small_instance_cross_validation(n_max: int = 8,
                                    variants=("async-edge", "async-vertex"),
                                    trials: int = 100_000, seed: int = 907,
                                    tol: float = 0.01) -> list:
    """Monte Carlo vs exact absorbing-chain probabilities on small instances."""
    from .graph import make_complete, make_path, sample_gnp

    if n_max > 10:
        raise ValueError("exact chains are only feasible for n_max <= 10")
    battery = []
    battery.append(("K2-two-value", make_complete(2), (0, 1), "async-edge"))
    battery.append(("path6-ordered", make_path(6),
                    tuple(ordered_path_opinions(6, 2, 2)), "async-edge"))
    battery.append(("K4-four-opinions", make_complete(4), (1, 2, 3, 4), "async-vertex"))
    gseed = 0
    while True:
        g = sample_gnp(7, 0.6, seed=gseed)
        if g.m and int(g.degrees.min()) > 0 and graph_mod.graph_stats(g).connected:
            break
        gseed += 1
    battery.append(("gnp7-three-opinions", g, (0, 1, 2, 2, 1, 0, 2), "async-edge"))

    reports = []
    for name, gg, x0, variant in battery:
        if gg.n > n_max or variant not in variants:
            continue
        chain = build_full_process_chain(gg, variant, x0)
        exact = solve_absorption(chain, tuple(x0)).probabilities
        spec = ProcessSpec(variant=variant, max_steps=50 * gg.n * gg.n)
        counts: dict = {}
        for t in range(trials):
            out = run_trial(gg, np.asarray(x0, dtype=np.int64), spec,
                            rng=trial_rng(seed, t))
            if out.winner is not None:
                counts[out.winner] = counts.get(out.winner, 0) + 1
        total = sum(counts.values())
        max_dev = 0.0
        for op in set(exact) | set(counts):
            f = counts.get(op, 0) / total
            max_dev = max(max_dev, abs(f - exact.get(op, 0.0)))
        reports.append({
            "instance": name,
            "variant": variant,
            "trials": total,
            "exact": {str(k): float(v) for k, v in sorted(exact.items())},
            "freq": {str(k): counts.get(k, 0) / total for k in sorted(exact)},
            "max_dev": max_dev,
            "ok": max_dev <= tol,
        })
    return reports
