"""Count-based engines for the complete graph, plus exact drift formulas.

On K_n the opinion vector is exchangeable, so the process lumps to its count
vector (N_1, ..., N_k).  Synchronous rounds split each class multinomially
over (down, stay, up); asynchronous steps move one holder at a time.

Observation convention: with self_obs=True (default) the observed vertex is
uniform over all n vertices, so a vertex may sample itself (a no-op); the
closed-form drift formulas below are exact for this convention.  With
self_obs=False the observed vertex is uniform over the n-1 others, which is
what the general graph engine does on K_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _kernels
from .rng import make_rng

__all__ = [
    "CountState",
    "CountTrialOutcome",
    "step_sync_counts",
    "step_async_counts",
    "run_count_trial",
    "DriftWithBound",
    "extreme_product_drift_sync",
    "three_value_product_drift_sync",
    "extreme_product_drift_async",
    "three_value_product_drift_async",
]


@dataclass(frozen=True)
class CountState:
    """Opinion counts over a window of consecutive integer opinions.

    counts[i] is the support of opinion lo + i; zeros inside the window are
    allowed (an opinion may die and revive).
    """

    counts: np.ndarray
    lo: int = 1
    step: int = 0

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("counts must be a nonempty vector")
        if (arr < 0).any():
            raise ValueError("counts must be nonnegative")
        if arr.sum() <= 0:
            raise ValueError("counts must hold at least one vertex")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def k(self) -> int:
        return int(self.counts.size)

    @property
    def values(self) -> np.ndarray:
        return np.arange(self.lo, self.lo + self.k)

    @property
    def s_total(self) -> int:
        return int((self.values * self.counts).sum())

    def support_span(self):
        nz = np.nonzero(self.counts)[0]
        return int(nz[0]), int(nz[-1])

    def consensus_value(self):
        s, e = self.support_span()
        return self.lo + s if s == e else None


def step_sync_counts(cs: CountState, rng, self_obs: bool = True) -> CountState:
    """One synchronous round: each class splits multinomially over
    (down, stay, up) with mass-proportional probabilities."""
    counts = cs.counts.copy()
    newc = np.zeros_like(counts)
    _kernels.sync_counts_round(counts, newc, cs.n, self_obs, rng)
    return CountState(counts=counts, lo=cs.lo, step=cs.step + 1)


def step_async_counts(cs: CountState, rng, self_obs: bool = True) -> CountState:
    """One asynchronous step: a mass-weighted chooser observes a mass-weighted
    vertex; at most one adjacent pair of counts changes."""
    counts = cs.counts.copy()
    _kernels.async_counts_step(counts, cs.n, self_obs, rng)
    return CountState(counts=counts, lo=cs.lo, step=cs.step + 1)


@dataclass(frozen=True)
class CountTrialOutcome:
    winner: int | None
    consensus_step: int | None
    final_three_step: int | None
    final_two_step: int | None
    eliminations: tuple
    steps: int
    completed: bool
    s0: int
    trajectory_t: np.ndarray = field(repr=False)
    trajectory_counts: np.ndarray = field(repr=False)

    @property
    def first_elimination_step(self):
        return self.eliminations[0][1] if self.eliminations else None

    def trajectory_csv(self) -> str:
        k = self.trajectory_counts.shape[1]
        lines = ["t," + ",".join(f"N_{i + 1}" for i in range(k))]
        for t, row in zip(self.trajectory_t, self.trajectory_counts):
            lines.append(str(int(t)) + "," + ",".join(str(int(c)) for c in row))
        return "\n".join(lines) + "\n"


def run_count_trial(cs: CountState, sync: bool, max_steps: int | None = None,
                    stride: int = 0, self_obs: bool = True, rng=None,
                    seed: int = 0) -> CountTrialOutcome:
    """Drive the count engine to consensus or the step cap."""
    n = cs.n
    if max_steps is None:
        max_steps = 50 * n if sync else 50 * n * n
    if rng is None:
        rng = make_rng(seed)
    cap = 2 if stride <= 0 else max_steps // stride + 3
    if cap > 2_000_000:
        raise ValueError("checkpoint stride too small for the step cap")
    k = cs.k
    elim_vals = np.zeros(k, dtype=np.int64)
    elim_steps = np.zeros(k, dtype=np.int64)
    cp_t = np.zeros(cap, dtype=np.int64)
    cp_counts = np.zeros((cap, k), dtype=np.int64)
    res = _kernels.count_trial(cs.counts, cs.lo, sync, max_steps, stride,
                               self_obs, rng, elim_vals, elim_steps, cp_t, cp_counts)
    status, winner, consensus, final3, final2, n_elim, steps, ncp = res
    completed = status == _kernels.STATUS_CONSENSUS
    return CountTrialOutcome(
        winner=int(winner) if completed else None,
        consensus_step=int(consensus) if completed else None,
        final_three_step=int(final3) if final3 >= 0 else None,
        final_two_step=int(final2) if final2 >= 0 else None,
        eliminations=tuple((int(elim_vals[i]), int(elim_steps[i])) for i in range(n_elim)),
        steps=int(steps),
        completed=completed,
        s0=cs.s_total,
        trajectory_t=cp_t[:ncp].copy(),
        trajectory_counts=cp_counts[:ncp].copy(),
    )


# ---------------------------------------------------------------------------
# exact drift formulas (self-observation convention, probabilities N/n)
# ---------------------------------------------------------------------------


class DriftWithBound(NamedTuple):
    value: Fraction
    bound: Fraction


def _extremes(cs: CountState, min_gap: int):
    s, e = cs.support_span()
    if e - s < min_gap:
        raise ValueError(
            f"extreme opinions must satisfy l >= s+{min_gap}, got span {e - s}")
    return s, e


def extreme_product_drift_sync(cs: CountState) -> DriftWithBound:
    """Exact E[N_s' N_l'] for the extreme classes, one synchronous round.

    Valid for l >= s+3, where N_s' and N_l' are independent binomials; also
    returns the N_s N_l / 4 comparison bound.
    """
    s, e = _extremes(cs, 3)
    c = cs.counts
    n = cs.n
    value = Fraction(int(c[s] + c[s + 1]) * int(c[s]) * int(c[e - 1] + c[e]) * int(c[e]),
                     n * n)
    bound = Fraction(int(c[s]) * int(c[e]), 4)
    return DriftWithBound(value=value, bound=bound)


def three_value_product_drift_sync(cs: CountState) -> Fraction:
    """Exact E[N_1' N_3'] for a three-opinion window, one synchronous round.

    Uses the multinomial cross moment E[Y_{2->1} Y_{2->3}] =
    N_2 (N_2 - 1) N_1 N_3 / n^2 plus independent products, and checks the
    two closed-form upper bounds.
    """
    if cs.k != 3:
        raise ValueError("pass a 3-wide count window (support within 3 consecutive opinions)")
    n1, n2, n3 = (int(v) for v in cs.counts)
    n = cs.n
    value = Fraction(n1 * n3, n * n) * (n1 * n2 + n1 * n3 + n2 * (n2 - 1) + n2 * n3)
    bound1 = Fraction(n1 * (n - n3) * n3 * (n - n1), n * n)
    bound2 = (1 - Fraction(n1 + n3, 2 * n)) * n1 * n3
    if not (value <= bound1 <= bound2):
        raise AssertionError("three-value drift bound violated; formula inconsistency")
    return value


def extreme_product_drift_async(cs: CountState) -> Fraction:
    """Exact one-step drift E[Z' - Z] of Z = N_s N_l, asynchronous engine.

    Valid for l >= s+3; satisfies E[Z' - Z] <= -Z/n.
    """
    s, e = _extremes(cs, 3)
    c = cs.counts
    n = cs.n
    z = int(c[s]) * int(c[e])
    coeff = int(c[s + 1]) - n + int(c[s]) + int(c[e - 1]) - n + int(c[e])
    drift = Fraction(z * coeff, n * n)
    if z > 0 and drift > Fraction(-z, n):
        raise AssertionError("async extreme drift bound violated; formula inconsistency")
    return drift


def three_value_product_drift_async(cs: CountState) -> Fraction:
    """Exact E[N_1' N_3'] for a three-opinion window, one asynchronous step:
    (1 - (N_1 + N_3)/n^2) N_1 N_3."""
    if cs.k != 3:
        raise ValueError("pass a 3-wide count window (support within 3 consecutive opinions)")
    n1, _, n3 = (int(v) for v in cs.counts)
    n = cs.n
    return Fraction((n * n - (n1 + n3)) * n1 * n3, n * n)
