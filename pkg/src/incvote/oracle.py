"""Exact brute-force ground truth: absorbing chains and closed forms.

Everything here recomputes process laws from first principles (enumeration
of scheduler choices, exact multinomial pmfs, textbook linear algebra) and
never calls the simulation engines, so it can serve as the independent side
of every dual-route check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph

__all__ = [
    "AbsorbingChain",
    "AbsorptionResult",
    "NonAbsorbingChainError",
    "ChainTooLargeError",
    "solve_absorption",
    "build_full_process_chain",
    "gambler_ruin",
    "GamblerRuinResult",
    "path_reduced_walk_chain",
    "export_chain_csv",
    "one_step_state_distribution",
    "sync_counts_step_distribution",
    "async_counts_step_distribution",
]


class NonAbsorbingChainError(RuntimeError):
    """Probability mass does not converge to the absorbing states."""


class ChainTooLargeError(RuntimeError):
    """Reachable state space exceeded the configured cap."""


@dataclass
class AbsorbingChain:
    """Sparse row-stochastic chain with labelled absorbing states.

    rows[i] maps column index to probability (float or Fraction); absorbing
    states self-loop and carry a winning-opinion label.
    """

    states: list
    rows: list
    labels: dict  # state index -> opinion label
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {s: i for i, s in enumerate(self.states)}

    @property
    def size(self) -> int:
        return len(self.states)

    def validate(self, tol: float = 1e-12):
        for i, row in enumerate(self.rows):
            total = sum(row.values())
            if isinstance(total, Fraction):
                ok = total == 1
            else:
                ok = abs(total - 1.0) <= tol
            if not ok:
                raise ValueError(f"row {i} sums to {total}, not 1")
        for i in self.labels:
            if set(self.rows[i]) != {i}:
                raise ValueError(f"absorbing state {i} does not self-loop")


class AbsorptionResult(NamedTuple):
    probabilities: dict   # opinion label -> probability
    expected_steps: object

    def mean_label(self):
        return sum(lab * p for lab, p in self.probabilities.items())


def _solve_float(chain: AbsorbingChain, si: int) -> AbsorptionResult:
    n = chain.size
    label_list = sorted(set(chain.labels.values()))
    lpos = {lab: j for j, lab in enumerate(label_list)}
    transient = [i for i in range(n) if i not in chain.labels]
    tpos = {i: j for j, i in enumerate(transient)}
    nt = len(transient)
    rows_i, cols_i, vals = [], [], []
    r = np.zeros((nt, len(label_list)))
    for i in transient:
        ti = tpos[i]
        for j, p in chain.rows[i].items():
            p = float(p)
            if j in chain.labels:
                r[ti, lpos[chain.labels[j]]] += p
            else:
                rows_i.append(ti)
                cols_i.append(tpos[j])
                vals.append(p)
    a = sp.identity(nt, format="csc") - sp.csc_matrix(
        (vals, (rows_i, cols_i)), shape=(nt, nt))
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:
        raise NonAbsorbingChainError(f"singular transient system: {exc}") from exc
    b = lu.solve(r)
    b += lu.solve(r - a @ b)  # one refinement pass
    ones = np.ones(nt)
    tau = lu.solve(ones)
    tau += lu.solve(ones - a @ tau)
    ti = tpos[si]
    total = float(b[ti].sum())
    if not math.isfinite(total) or abs(total - 1.0) > 1e-9:
        raise NonAbsorbingChainError(
            f"absorption mass from start sums to {total}, not 1")
    probs = {lab: float(b[ti, lpos[lab]]) for lab in label_list}
    return AbsorptionResult(probabilities=probs, expected_steps=float(tau[ti]))


def _solve_rational(chain: AbsorbingChain, si: int) -> AbsorptionResult:
    # Gauss-Jordan over Fractions; intended for small chains
    n = chain.size
    label_list = sorted(set(chain.labels.values()))
    transient = [i for i in range(n) if i not in chain.labels]
    tpos = {i: j for j, i in enumerate(transient)}
    nt = len(transient)
    width = len(label_list) + 1
    a = [[Fraction(0)] * nt for _ in range(nt)]
    rhs = [[Fraction(0)] * width for _ in range(nt)]
    for i in transient:
        ti = tpos[i]
        a[ti][ti] += 1
        rhs[ti][-1] = Fraction(1)
        for j, p in chain.rows[i].items():
            p = Fraction(p)
            if j in chain.labels:
                rhs[ti][label_list.index(chain.labels[j])] += p
            else:
                a[ti][tpos[j]] -= p
    for col in range(nt):
        piv = next((r for r in range(col, nt) if a[r][col] != 0), None)
        if piv is None:
            raise NonAbsorbingChainError("singular transient system (rational)")
        a[col], a[piv] = a[piv], a[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        rhs[col] = [v * inv for v in rhs[col]]
        for r in range(nt):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [vr - f * vc for vr, vc in zip(a[r], a[col])]
                rhs[r] = [vr - f * vc for vr, vc in zip(rhs[r], rhs[col])]
    ti = tpos[si]
    probs = {lab: rhs[ti][j] for j, lab in enumerate(label_list)}
    if sum(probs.values()) != 1:
        raise NonAbsorbingChainError("rational absorption mass does not sum to 1")
    return AbsorptionResult(probabilities=probs, expected_steps=rhs[ti][-1])


def solve_absorption(chain: AbsorbingChain, start, method: str = "auto") -> AbsorptionResult:
    """Absorption probabilities per label and expected absorption time.

    method 'float' uses sparse LU with one iterative-refinement pass
    (residuals ~1e-13); 'rational' does exact Fraction elimination and is
    meant for small chains; 'auto' picks rational only when the chain was
    built with exact probabilities and is small.
    """
    chain.validate()
    if start not in chain.index:
        raise ValueError(f"start state {start!r} not in chain")
    si = chain.index[start]
    if si in chain.labels:
        one = Fraction(1) if method == "rational" else 1.0
        return AbsorptionResult(probabilities={chain.labels[si]: one},
                                expected_steps=0 if method == "rational" else 0.0)
    if method == "auto":
        exact = chain.rows and any(
            isinstance(p, Fraction) for p in chain.rows[si].values())
        method = "rational" if exact and chain.size <= 400 else "float"
    if method == "rational":
        return _solve_rational(chain, si)
    return _solve_float(chain, si)


# ---------------------------------------------------------------------------
# full-process chains
# ---------------------------------------------------------------------------


def _sign(d):
    return 1 if d > 0 else (-1 if d < 0 else 0)


def _async_choice_distribution(x, g: Graph, variant: str) -> dict:
    out: dict = {}
    if variant == "async-edge":
        w = Fraction(1, 2 * g.m)
        for u, v in g.edges.tolist():
            for ch, ob in ((u, v), (v, u)):
                d = _sign(x[ob] - x[ch])
                ns = x if d == 0 else x[:ch] + (x[ch] + d,) + x[ch + 1:]
                out[ns] = out.get(ns, Fraction(0)) + w
    elif variant == "async-vertex":
        for ch in range(g.n):
            w = Fraction(1, g.n * int(g.degrees[ch]))
            for ob in g.neighbors(ch):
                d = _sign(x[int(ob)] - x[ch])
                ns = x if d == 0 else x[:ch] + (x[ch] + d,) + x[ch + 1:]
                out[ns] = out.get(ns, Fraction(0)) + w
    elif variant == "async-vertex-pi-chooser":
        # footnote-style scheduler: chooser sampled by pi_v, then a uniform neighbour
        for ch in range(g.n):
            w = Fraction(int(g.degrees[ch]), 2 * g.m) * Fraction(1, int(g.degrees[ch]))
            for ob in g.neighbors(ch):
                d = _sign(x[int(ob)] - x[ch])
                ns = x if d == 0 else x[:ch] + (x[ch] + d,) + x[ch + 1:]
                out[ns] = out.get(ns, Fraction(0)) + w
    else:
        raise ValueError(f"not an asynchronous variant: {variant}")
    return out


def _sync_state_distribution(x, g: Graph, propensity=None,
                             branch_cap: int = 200_000) -> dict:
    # per-vertex move distribution, then the product measure over vertices
    per_vertex = []
    for v in range(g.n):
        dv = int(g.degrees[v])
        moves: dict = {}
        for w in g.neighbors(v):
            d = _sign(x[int(w)] - x[v])
            moves[d] = moves.get(d, Fraction(0)) + Fraction(1, dv)
        if propensity is not None:
            lv = Fraction(propensity[v])
            moves = {d: p * lv for d, p in moves.items()}
            moves[0] = moves.get(0, Fraction(0)) + (1 - lv)
        per_vertex.append(sorted((d, p) for d, p in moves.items() if p > 0))
    total_branches = 1
    for moves in per_vertex:
        total_branches *= len(moves)
        if total_branches > branch_cap:
            raise ChainTooLargeError(
                f"synchronous product enumeration exceeds {branch_cap} branches")
    out: dict = {}

    def rec(v, acc, prob):
        if v == g.n:
            ns = tuple(acc)
            out[ns] = out.get(ns, Fraction(0)) + prob
            return
        for d, p in per_vertex[v]:
            acc.append(x[v] + d)
            rec(v + 1, acc, prob * p)
            acc.pop()

    rec(0, [], Fraction(1))
    return out


def one_step_state_distribution(g: Graph, opinions, variant: str,
                                propensity=None, branch_cap: int = 200_000) -> dict:
    """Exact one-step law over next opinion vectors, by enumerating choices."""
    x = tuple(int(v) for v in opinions)
    if variant in ("async-edge", "async-vertex", "async-vertex-pi-chooser"):
        return _async_choice_distribution(x, g, variant)
    if variant == "sync-vertex":
        return _sync_state_distribution(x, g, None, branch_cap)
    if variant == "generalized":
        if propensity is None:
            raise ValueError("generalized variant needs propensity")
        return _sync_state_distribution(x, g, propensity, branch_cap)
    raise ValueError(f"unknown variant {variant!r}")


def build_full_process_chain(g: Graph, variant: str, initial,
                             cap: int = 200_000, exact: bool = False,
                             propensity=None,
                             branch_cap: int = 200_000) -> AbsorbingChain:
    """Exact reachable-state chain of the chosen variant from an initial state.

    States are opinion tuples discovered by breadth-first closure; feasible
    for small n (the reachable set is far smaller than k^n).
    """
    start = tuple(int(v) for v in initial)
    if len(start) != g.n:
        raise ValueError(f"need {g.n} opinions")
    states = [start]
    index = {start: 0}
    rows: list = []
    labels: dict = {}
    pos = 0
    while pos < len(states):
        st = states[pos]
        if all(v == st[0] for v in st):
            labels[pos] = st[0]
            rows.append({pos: Fraction(1) if exact else 1.0})
            pos += 1
            continue
        dist = one_step_state_distribution(g, st, variant, propensity, branch_cap)
        row: dict = {}
        for ns, p in dist.items():
            j = index.get(ns)
            if j is None:
                if len(states) >= cap:
                    raise ChainTooLargeError(f"reachable state count exceeds cap {cap}")
                j = len(states)
                index[ns] = j
                states.append(ns)
            key = p if exact else float(p)
            row[j] = row.get(j, Fraction(0) if exact else 0.0) + key
        rows.append(row)
        pos += 1
    return AbsorbingChain(states=states, rows=rows, labels=labels, index=index)


# ---------------------------------------------------------------------------
# gambler's ruin
# ---------------------------------------------------------------------------


class GamblerRuinResult(NamedTuple):
    ruin_prob: object        # absorption at 0
    expected_duration: object
    duration_bound: object   # z/(q-p) when q > p, else None


def gambler_ruin(z: int, length: int, q) -> GamblerRuinResult:
    """Ruin probability and expected duration of a +-1 walk on {0..L}.

    q is the probability of moving left (toward 0).  Exact rationals are
    returned when q is a Fraction and L is small; otherwise floats.  The
    unbiased case uses the closed forms 1 - z/L and z(L-z); the biased ruin
    probability is ((q/p)^L - (q/p)^z) / ((q/p)^L - 1) and the biased
    duration comes from the tridiagonal linear solve, with the z/(q-p)
    upper bound reported alongside.
    """
    if length <= 0:
        raise ValueError("walk needs L >= 1")
    if not (0 <= z <= length):
        raise ValueError(f"start z={z} outside 0..{length}")
    exact = isinstance(q, (Fraction, int)) and length <= 500
    qf = Fraction(q) if exact else float(q)
    if not (0 < qf < 1):
        raise ValueError(f"q must lie in (0,1), got {q}")
    if z == 0:
        return GamblerRuinResult(Fraction(1) if exact else 1.0,
                                 Fraction(0) if exact else 0.0, None)
    if z == length:
        return GamblerRuinResult(Fraction(0) if exact else 0.0,
                                 Fraction(0) if exact else 0.0, None)
    p = 1 - qf
    if qf == p:
        if exact:
            ruin = 1 - Fraction(z, length)
            dur = Fraction(z * (length - z))
        else:
            ruin = 1.0 - z / length
            dur = float(z * (length - z))
        return GamblerRuinResult(ruin, dur, None)
    r = qf / p
    ruin = (r ** length - r ** z) / (r ** length - 1)
    # duration by tridiagonal solve of D_i = 1 + q D_{i-1} + p D_{i+1}
    dur = _ruin_duration_solve(length, qf, z, exact)
    bound = z / (qf - p) if qf > p else None
    return GamblerRuinResult(ruin, dur, bound)


def _ruin_duration_solve(length: int, qf, z: int, exact: bool):
    nt = length - 1
    p = 1 - qf
    if exact:
        a = [[Fraction(0)] * nt for _ in range(nt)]
        b = [Fraction(1)] * nt
        for i in range(nt):
            a[i][i] = Fraction(1)
            if i > 0:
                a[i][i - 1] = -qf
            if i < nt - 1:
                a[i][i + 1] = -p
        # forward elimination on the tridiagonal system
        for i in range(1, nt):
            f = a[i][i - 1] / a[i - 1][i - 1]
            a[i][i] -= f * a[i - 1][i]
            b[i] -= f * b[i - 1]
        x = [Fraction(0)] * nt
        x[-1] = b[-1] / a[-1][-1]
        for i in range(nt - 2, -1, -1):
            x[i] = (b[i] - a[i][i + 1] * x[i + 1]) / a[i][i]
        return x[z - 1]
    diag = np.full(nt, 1.0)
    lower = np.full(nt - 1, -float(qf))
    upper = np.full(nt - 1, -float(p))
    ab = np.zeros((3, nt))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    from scipy.linalg import solve_banded
    x = solve_banded((1, 1), ab, np.ones(nt))
    return float(x[z - 1])


# ---------------------------------------------------------------------------
# ordered-path triangle walk
# ---------------------------------------------------------------------------


def path_reduced_walk_chain(n: int, i0: int, j0: int, exact: bool = False) -> AbsorbingChain:
    """Random walk on the integral points of the triangle i,j >= 0, i+j <= n.

    (i, j) counts the prefix zeros and suffix twos of the ordered path;
    interior states move to the four neighbours w.p. 1/4, the i=0 / j=0
    sides move along themselves w.p. 1/2, non-final diagonal states drop to
    (i-1, j) or (i, j-1) w.p. 1/2.  Absorbing: (n,0) -> opinion 0,
    (0,n) -> opinion 2, (0,0) -> opinion 1.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if i0 < 0 or j0 < 0 or i0 + j0 > n:
        raise ValueError(f"infeasible start ({i0}, {j0}) for n={n}")
    half = Fraction(1, 2) if exact else 0.5
    quarter = Fraction(1, 4) if exact else 0.25
    one = Fraction(1) if exact else 1.0
    states = [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]
    index = {s: k for k, s in enumerate(states)}
    labels_by_state = {(n, 0): 0, (0, 0): 1, (0, n): 2}
    rows = []
    labels = {}
    for k, (i, j) in enumerate(states):
        if (i, j) in labels_by_state:
            labels[k] = labels_by_state[(i, j)]
            rows.append({k: one})
            continue
        if i + j == n:
            row = {index[(i - 1, j)]: half, index[(i, j - 1)]: half}
        elif i == 0:
            row = {index[(0, j - 1)]: half, index[(0, j + 1)]: half}
        elif j == 0:
            row = {index[(i - 1, 0)]: half, index[(i + 1, 0)]: half}
        else:
            row = {index[(i - 1, j)]: quarter, index[(i + 1, j)]: quarter,
                   index[(i, j - 1)]: quarter, index[(i, j + 1)]: quarter}
        rows.append(row)
    return AbsorbingChain(states=states, rows=rows, labels=labels, index=index)


def export_chain_csv(chain: AbsorbingChain) -> str:
    """Sparse triplet dump, one 'row,col,prob' line per transition."""
    lines = ["row,col,prob"]
    for i, row in enumerate(chain.rows):
        for j in sorted(row):
            lines.append(f"{i},{j},{float(row[j])!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# count-engine one-step enumeration (independent of the samplers)
# ---------------------------------------------------------------------------


def _binom(n: int, k: int) -> int:
    return math.comb(n, k)


def sync_counts_step_distribution(counts, self_obs: bool = True) -> dict:
    """Exact one-round law of the synchronous count engine on K_n.

    Returns {next count tuple: Fraction probability}; enumerates the
    trinomial split of every class and takes the product measure.
    """
    c = [int(v) for v in counts]
    k = len(c)
    n = sum(c)
    den = n if self_obs else n - 1
    acc = {tuple([0] * k): Fraction(1)}
    below = 0
    for i, ci in enumerate(c):
        above = n - below - ci
        if ci:
            pd = Fraction(below, den)
            pu = Fraction(above, den)
            ps = 1 - pd - pu
            branches = []
            for d in range(ci + 1):
                if d and pd == 0:
                    break
                for u in range(ci - d + 1):
                    if u and pu == 0:
                        break
                    stay = ci - d - u
                    if stay and ps == 0:
                        continue
                    prob = (_binom(ci, d) * _binom(ci - d, u)
                            * pd ** d * pu ** u * ps ** stay)
                    if prob:
                        branches.append((d, u, prob))
            nxt: dict = {}
            for vec, p in acc.items():
                for d, u, pb in branches:
                    nv = list(vec)
                    if d:
                        nv[i - 1] += d
                    nv[i] += ci - d - u
                    if u:
                        nv[i + 1] += u
                    key = tuple(nv)
                    nxt[key] = nxt.get(key, Fraction(0)) + p * pb
            acc = nxt
        below += ci
    return acc


def async_counts_step_distribution(counts, self_obs: bool = True) -> dict:
    """Exact one-step law of the asynchronous count engine on K_n."""
    c = [int(v) for v in counts]
    k = len(c)
    n = sum(c)
    out: dict = {}
    base = tuple(c)
    for i in range(k):
        if c[i] == 0:
            continue
        pi = Fraction(c[i], n)
        for j in range(k):
            cj = c[j] - (1 if (not self_obs and j == i) else 0)
            if cj <= 0:
                continue
            pj = Fraction(cj, n if self_obs else n - 1)
            prob = pi * pj
            if j == i:
                out[base] = out.get(base, Fraction(0)) + prob
            else:
                d = 1 if j > i else -1
                nv = list(c)
                nv[i] -= 1
                nv[i + d] += 1
                key = tuple(nv)
                out[key] = out.get(key, Fraction(0)) + prob
    return out
