"""Incremental voting dynamics on arbitrary graphs.

A chooser vertex observes one vertex and moves its integer opinion by +-1
toward the observed value (no change on ties).  Three schedulers: pick a
uniform vertex then a uniform neighbour (async-vertex), pick a uniform edge
then a fair endpoint (async-edge), or let every vertex update simultaneously
against a frozen snapshot (sync-vertex).  The generalized variant is the
synchronous kernel where vertex v only participates with propensity L_v.

Step functions are the reference implementation; `run_trial` drives the
numba kernels, which consume the same Generator draws in the same order, so
both produce identical trajectories for the same stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import _kernels
from .graph import Graph
from .rng import make_rng

__all__ = [
    "VARIANTS",
    "ASYNC_VARIANTS",
    "SYNC_VARIANTS",
    "ProcessSpec",
    "OpinionState",
    "StepRecord",
    "TrialOutcome",
    "IsolatedVertexError",
    "step_async_vertex",
    "step_async_edge",
    "step_sync_vertex",
    "step_generalized",
    "expected_step_change_exact",
    "expected_count_drift_exact",
    "expected_generalized_change_exact",
    "generalized_weights",
    "run_trial",
    "ordered_path_opinions",
    "parse_initial_text",
    "format_initial_text",
    "CHECKPOINT_HEADER",
]

VARIANTS = ("async-vertex", "async-edge", "sync-vertex", "generalized")
ASYNC_VARIANTS = ("async-vertex", "async-edge")
SYNC_VARIANTS = ("sync-vertex", "generalized")

CHECKPOINT_HEADER = "t,S,Z_scaled,num_distinct,min_op,max_op"

MAX_SCALE_EXPONENT = 4
_INT64_GUARD = 2 ** 62


class IsolatedVertexError(ValueError):
    """A vertex scheduler selected (or would select) a vertex with no neighbour."""


def _sign(d: int) -> int:
    return 1 if d > 0 else (-1 if d < 0 else 0)


@dataclass(frozen=True)
class ProcessSpec:
    """Which process to run: variant, kernel parameters, seed, step cap."""

    variant: str
    propensity: tuple | None = None
    seed: int = 0
    max_steps: int | None = None
    scale_exponent: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.max_steps is not None and self.max_steps <= 0:
            raise ValueError("max_steps must be positive")
        if not (0 <= self.scale_exponent <= MAX_SCALE_EXPONENT):
            raise ValueError(f"scale_exponent must be in 0..{MAX_SCALE_EXPONENT}")
        if self.variant == "generalized":
            if self.propensity is None:
                raise ValueError("generalized variant needs a propensity vector")
            for lv in self.propensity:
                if not (0 < lv <= 1):
                    raise ValueError(f"propensity entries must lie in (0, 1], got {lv}")

    @property
    def is_async(self) -> bool:
        return self.variant in ASYNC_VARIANTS

    def default_max_steps(self, n: int) -> int:
        # generous slack over the O(n^2) / O(n) expected completion times
        return 50 * n * n if self.is_async else 50 * n


@dataclass(frozen=True)
class StepRecord:
    t: int
    chooser: int
    observed: int
    delta: int


@dataclass(frozen=True)
class OpinionState:
    """Opinion vector plus incrementally maintained aggregates.

    s_total is S(t) = sum_v X_v; z_scaled is sum_v d(v) X_v, which equals
    2m * Z(t) / n and stays integral.
    """

    x: np.ndarray
    counts: dict
    step: int
    s_total: int
    z_scaled: int

    @classmethod
    def from_opinions(cls, g: Graph, opinions, step: int = 0) -> "OpinionState":
        x = np.asarray(opinions, dtype=np.int64).copy()
        if x.shape != (g.n,):
            raise ValueError(f"need {g.n} opinions, got shape {x.shape}")
        counts: dict = {}
        for v in x:
            counts[int(v)] = counts.get(int(v), 0) + 1
        s = int(x.sum())
        zs = int((g.degrees * x).sum())
        x.setflags(write=False)
        return cls(x=x, counts=counts, step=step, s_total=s, z_scaled=zs)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def num_distinct(self) -> int:
        return len(self.counts)

    def min_opinion(self) -> int:
        return min(self.counts)

    def max_opinion(self) -> int:
        return max(self.counts)

    def consensus_value(self):
        if len(self.counts) == 1:
            return next(iter(self.counts))
        return None

    def _with_flip(self, g: Graph, v: int, delta: int) -> "OpinionState":
        x2 = self.x.copy()
        old = int(x2[v])
        x2[v] = old + delta
        counts = dict(self.counts)
        counts[old] -= 1
        if counts[old] == 0:
            del counts[old]
        counts[old + delta] = counts.get(old + delta, 0) + 1
        x2.setflags(write=False)
        return OpinionState(
            x=x2, counts=counts, step=self.step + 1,
            s_total=self.s_total + delta,
            z_scaled=self.z_scaled + delta * int(g.degrees[v]),
        )

    def advanced(self) -> "OpinionState":
        return replace(self, step=self.step + 1)


def _check_no_isolated(g: Graph):
    if g.n and int(g.degrees.min()) == 0:
        v = int(np.argmin(g.degrees))
        raise IsolatedVertexError(f"vertex {v} has no neighbour")


def step_async_vertex(state: OpinionState, g: Graph, rng, trace: list | None = None) -> OpinionState:
    """Pick a vertex u.a.r., then one of its neighbours u.a.r.; chooser updates."""
    _check_no_isolated(g)
    v = int(rng.integers(0, g.n))
    j = int(rng.integers(0, int(g.degrees[v])))
    w = int(g.adj_flat[g.adj_off[v] + j])
    delta = _sign(int(state.x[w]) - int(state.x[v]))
    if trace is not None:
        trace.append(StepRecord(t=state.step, chooser=v, observed=w, delta=delta))
    if delta == 0:
        return state.advanced()
    return state._with_flip(g, v, delta)


def step_async_edge(state: OpinionState, g: Graph, rng, trace: list | None = None) -> OpinionState:
    """Pick a uniform edge, then a fair endpoint as the chooser."""
    if g.m == 0:
        raise IsolatedVertexError("graph has no edges")
    e = int(rng.integers(0, g.m))
    side = int(rng.integers(0, 2))
    u, v = int(g.edges[e, 0]), int(g.edges[e, 1])
    ch, ob = (u, v) if side == 0 else (v, u)
    delta = _sign(int(state.x[ob]) - int(state.x[ch]))
    if trace is not None:
        trace.append(StepRecord(t=state.step, chooser=ch, observed=ob, delta=delta))
    if delta == 0:
        return state.advanced()
    return state._with_flip(g, ch, delta)


def _sync_apply(state: OpinionState, g: Graph, deltas) -> OpinionState:
    x2 = state.x.copy()
    counts = dict(state.counts)
    s = state.s_total
    zs = state.z_scaled
    for v, d in enumerate(deltas):
        if d:
            d = int(d)
            old = int(x2[v])
            x2[v] = old + d
            counts[old] -= 1
            if counts[old] == 0:
                del counts[old]
            counts[old + d] = counts.get(old + d, 0) + 1
            s += d
            zs += d * int(g.degrees[v])
    x2.setflags(write=False)
    return OpinionState(x=x2, counts=counts, step=state.step + 1,
                        s_total=s, z_scaled=zs)


def step_sync_vertex(state: OpinionState, g: Graph, rng) -> OpinionState:
    """Every vertex observes a uniform neighbour of the pre-step snapshot."""
    _check_no_isolated(g)
    deltas = np.zeros(g.n, dtype=np.int8)
    for v in range(g.n):
        j = int(rng.integers(0, int(g.degrees[v])))
        w = int(g.adj_flat[g.adj_off[v] + j])
        deltas[v] = _sign(int(state.x[w]) - int(state.x[v]))
    return _sync_apply(state, g, deltas)


def step_generalized(state: OpinionState, g: Graph, spec: ProcessSpec, rng) -> OpinionState:
    """Synchronous update where vertex v moves only with propensity L_v."""
    if spec.propensity is None:
        raise ValueError("generalized step needs spec.propensity")
    if len(spec.propensity) != g.n:
        raise ValueError("propensity length must equal vertex count")
    _check_no_isolated(g)
    deltas = np.zeros(g.n, dtype=np.int8)
    for v in range(g.n):
        if rng.random() < float(spec.propensity[v]):
            j = int(rng.integers(0, int(g.degrees[v])))
            w = int(g.adj_flat[g.adj_off[v] + j])
            deltas[v] = _sign(int(state.x[w]) - int(state.x[v]))
    return _sync_apply(state, g, deltas)


# ---------------------------------------------------------------------------
# exact one-step expectations
# ---------------------------------------------------------------------------


def expected_step_change_exact(state: OpinionState, g: Graph, variant: str):
    """Exact (E[S'-S], E[Z'-Z]) as rationals, by enumerating every scheduler choice.

    async-edge sums over all 2m (edge, endpoint) choices; async-vertex over
    all (vertex, neighbour) pairs with weight 1/(n d(v)); sync sums the
    per-vertex expected changes.  Nothing is pre-simplified: the martingale
    zeros emerge from the cancellation in the sums.
    """
    x = state.x
    n, m = g.n, g.m
    if variant == "async-edge":
        if m == 0:
            return Fraction(0), Fraction(0)
        ds_num = 0
        dzs_num = 0
        for u, v in g.edges.tolist():
            duv = _sign(int(x[v]) - int(x[u]))  # u's move when u observes v
            dvu = _sign(int(x[u]) - int(x[v]))  # v's move when v observes u
            ds_num += duv + dvu
            dzs_num += int(g.degrees[u]) * duv + int(g.degrees[v]) * dvu
        # each (edge, endpoint) choice has probability 1/(2m)
        ds = Fraction(ds_num, 2 * m)
        dz = Fraction(n, 2 * m) * Fraction(dzs_num, 2 * m)
        return ds, dz
    if variant == "async-vertex":
        _check_no_isolated(g)
        ds = Fraction(0)
        dzs = Fraction(0)
        for v in range(n):
            dv = int(g.degrees[v])
            acc = 0
            for w in g.neighbors(v):
                acc += _sign(int(x[int(w)]) - int(x[v]))
            ds += Fraction(acc, n * dv)
            dzs += Fraction(acc * dv, n * dv)
        return ds, Fraction(n, 2 * m) * dzs
    if variant == "sync-vertex":
        _check_no_isolated(g)
        ds = Fraction(0)
        dzs = Fraction(0)
        for v in range(n):
            dv = int(g.degrees[v])
            acc = 0
            for w in g.neighbors(v):
                acc += _sign(int(x[int(w)]) - int(x[v]))
            ds += Fraction(acc, dv)
            dzs += Fraction(acc * dv, dv)
        return ds, Fraction(n, 2 * m) * dzs
    raise ValueError(f"variant {variant!r} not supported here (use "
                     "expected_generalized_change_exact for the kernel variant)")


def expected_count_drift_exact(state: OpinionState, g: Graph,
                               variant: str = "async-edge") -> dict:
    """Exact per-opinion drift E[N_i' - N_i] by enumerating scheduler choices."""
    x = state.x
    drift: dict = {int(op): Fraction(0) for op in state.counts}
    if variant == "async-edge":
        if g.m == 0:
            return drift
        w8 = Fraction(1, 2 * g.m)
        for u, v in g.edges.tolist():
            for ch, ob in ((u, v), (v, u)):
                d = _sign(int(x[ob]) - int(x[ch]))
                if d:
                    old = int(x[ch])
                    drift[old] = drift.get(old, Fraction(0)) - w8
                    drift[old + d] = drift.get(old + d, Fraction(0)) + w8
        return drift
    if variant == "async-vertex":
        _check_no_isolated(g)
        for ch in range(g.n):
            w8 = Fraction(1, g.n * int(g.degrees[ch]))
            for ob in g.neighbors(ch):
                d = _sign(int(x[int(ob)]) - int(x[ch]))
                if d:
                    old = int(x[ch])
                    drift[old] = drift.get(old, Fraction(0)) - w8
                    drift[old + d] = drift.get(old + d, Fraction(0)) + w8
        return drift
    raise ValueError("per-opinion drift enumeration covers the asynchronous variants")


def generalized_weights(g: Graph, propensity) -> list:
    """Stationary weights of the propensity kernel, d(v)/L_v normalized to sum 1."""
    raw = [Fraction(int(g.degrees[v])) / Fraction(propensity[v]) for v in range(g.n)]
    total = sum(raw)
    return [r / total for r in raw]


def expected_generalized_change_exact(state: OpinionState, g: Graph, propensity) -> Fraction:
    """Exact E[W' - W] for W = sum_v pi_v X_v under the propensity kernel.

    Propensities must be exact rationals.  The per-vertex expected move is
    (L_v/d(v)) * sum of signs toward neighbours; the weighted sum cancels
    pairwise by detailed balance, and that cancellation is what is computed.
    """
    for lv in propensity:
        if not isinstance(lv, (Fraction, int)):
            raise TypeError(f"propensity entries must be exact rationals, got {type(lv).__name__}")
        if not (0 < Fraction(lv) <= 1):
            raise ValueError("propensity entries must lie in (0, 1]")
    _check_no_isolated(g)
    weights = generalized_weights(g, propensity)
    x = state.x
    total = Fraction(0)
    for v in range(g.n):
        lv = Fraction(propensity[v])
        dv = int(g.degrees[v])
        acc = 0
        for w in g.neighbors(v):
            acc += _sign(int(x[int(w)]) - int(x[v]))
        total += weights[v] * lv * Fraction(acc, dv)
    return total


# ---------------------------------------------------------------------------
# trial driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialOutcome:
    """What one trial produced.

    eliminations lists (opinion value, step) each time an extreme value's
    support hit zero for good; checkpoints rows are
    (t, S, Z_scaled, num_distinct, min_op, max_op).
    """

    winner: int | None
    consensus_step: int | None
    final_three_step: int | None
    final_two_step: int | None
    eliminations: tuple
    steps: int
    completed: bool
    s0: int
    z0_scaled: int
    scale_exponent: int
    checkpoints: np.ndarray = field(repr=False)

    @property
    def first_elimination_step(self):
        return self.eliminations[0][1] if self.eliminations else None

    @property
    def winner_rescaled(self):
        if self.winner is None:
            return None
        return self.winner / 10 ** self.scale_exponent

    def checkpoints_csv(self) -> str:
        lines = [CHECKPOINT_HEADER]
        for row in self.checkpoints:
            lines.append(",".join(str(int(c)) for c in row))
        return "\n".join(lines) + "\n"


def _checkpoint_capacity(max_steps: int, stride: int) -> int:
    if stride <= 0:
        return 2
    cap = max_steps // stride + 3
    if cap > 2_000_000:
        raise ValueError("checkpoint stride too small for the step cap")
    return cap


def run_trial(g: Graph, initial, spec: ProcessSpec, checkpoint_stride: int = 0,
              rng=None) -> TrialOutcome:
    """Run one trial to consensus or the step cap.

    `initial` is an OpinionState or an opinion array.  A hit step cap flags
    the outcome incomplete; it is never silently truncated.
    """
    if isinstance(initial, OpinionState):
        x0 = np.asarray(initial.x, dtype=np.int64)
    else:
        x0 = np.asarray(initial, dtype=np.int64)
    if x0.shape != (g.n,):
        raise ValueError(f"need {g.n} opinions, got shape {x0.shape}")
    if spec.scale_exponent:
        x0 = x0 * 10 ** spec.scale_exponent
    max_abs = int(np.abs(x0).max()) if g.n else 0
    if g.n * max(max_abs, 1) >= _INT64_GUARD or int(g.degrees.sum()) * max(max_abs, 1) >= _INT64_GUARD:
        raise OverflowError("opinion magnitudes too large for 64-bit aggregates")

    if spec.variant == "async-edge":
        if g.m == 0:
            raise IsolatedVertexError("graph has no edges")
    else:
        _check_no_isolated(g)
    if spec.variant == "generalized" and len(spec.propensity) != g.n:
        raise ValueError("propensity length must equal vertex count")

    max_steps = spec.max_steps if spec.max_steps is not None else spec.default_max_steps(g.n)
    cp_cap = _checkpoint_capacity(max_steps, checkpoint_stride)
    if rng is None:
        rng = make_rng(spec.seed)

    x = x0.copy()
    lo = int(x.min())
    width = int(x.max()) - lo + 1
    s0 = int(x.sum())
    z0 = int((g.degrees * x).sum())
    elim_vals = np.zeros(max(width, 1), dtype=np.int64)
    elim_steps = np.zeros(max(width, 1), dtype=np.int64)
    cp = np.zeros((cp_cap, 6), dtype=np.int64)

    if spec.variant in ASYNC_VARIANTS:
        res = _kernels.trial_async(
            g.edges[:, 0].astype(np.int64), g.edges[:, 1].astype(np.int64),
            g.adj_flat.astype(np.int64), g.adj_off.astype(np.int64),
            g.degrees, x, lo, width, spec.variant == "async-edge",
            max_steps, checkpoint_stride, rng, elim_vals, elim_steps, cp)
    else:
        if spec.variant == "generalized":
            prop = np.asarray([float(lv) for lv in spec.propensity], dtype=np.float64)
            use_prop = True
        else:
            prop = np.ones(g.n, dtype=np.float64)
            use_prop = False
        res = _kernels.trial_sync(
            g.adj_flat.astype(np.int64), g.adj_off.astype(np.int64),
            g.degrees, x, lo, width, prop, use_prop,
            max_steps, checkpoint_stride, rng, elim_vals, elim_steps, cp)

    status, winner, consensus, final3, final2, n_elim, steps, ncp = res
    completed = status == _kernels.STATUS_CONSENSUS
    return TrialOutcome(
        winner=int(winner) if completed else None,
        consensus_step=int(consensus) if completed else None,
        final_three_step=int(final3) if final3 >= 0 else None,
        final_two_step=int(final2) if final2 >= 0 else None,
        eliminations=tuple((int(elim_vals[i]), int(elim_steps[i])) for i in range(n_elim)),
        steps=int(steps),
        completed=completed,
        s0=s0,
        z0_scaled=z0,
        scale_exponent=spec.scale_exponent,
        checkpoints=cp[:ncp].copy(),
    )


# ---------------------------------------------------------------------------
# initial states
# ---------------------------------------------------------------------------


def ordered_path_opinions(n: int, i0: int, j0: int) -> np.ndarray:
    """Ordered-path initial vector: i0 zeros, then ones, then j0 twos."""
    if i0 < 0 or j0 < 0 or i0 + j0 > n:
        raise ValueError(f"infeasible (i0, j0) = ({i0}, {j0}) for n = {n}")
    x = np.ones(n, dtype=np.int64)
    x[:i0] = 0
    if j0:
        x[n - j0:] = 2
    return x


def parse_initial_text(text: str, n: int | None = None) -> np.ndarray:
    """Parse an initial state file.

    Two formats: one 'vertex_id opinion' pair per line, or run-length blocks
    'opinionxcount' laid out along the vertex order.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty initial-state text")
    if "x" in lines[0]:
        ops = []
        for ln in lines:
            op, cnt = ln.split("x")
            ops.extend([int(op)] * int(cnt))
        x = np.array(ops, dtype=np.int64)
        if n is not None and x.shape[0] != n:
            raise ValueError(f"run-length blocks cover {x.shape[0]} vertices, expected {n}")
        return x
    pairs = []
    for ln in lines:
        vid, op = ln.split()
        pairs.append((int(vid), int(op)))
    size = n if n is not None else max(v for v, _ in pairs) + 1
    x = np.zeros(size, dtype=np.int64)
    seen = np.zeros(size, dtype=bool)
    for vid, op in pairs:
        if not (0 <= vid < size):
            raise ValueError(f"vertex id {vid} out of range")
        if seen[vid]:
            raise ValueError(f"duplicate vertex id {vid}")
        seen[vid] = True
        x[vid] = op
    if not seen.all():
        raise ValueError("initial state does not cover every vertex")
    return x


def format_initial_text(x, run_length: bool = False) -> str:
    x = np.asarray(x, dtype=np.int64)
    if run_length:
        lines = []
        i = 0
        while i < x.shape[0]:
            j = i
            while j < x.shape[0] and x[j] == x[i]:
                j += 1
            lines.append(f"{int(x[i])}x{j - i}")
            i = j
        return "\n".join(lines) + "\n"
    return "\n".join(f"{v} {int(op)}" for v, op in enumerate(x)) + "\n"
