"""Closed-form winning-distribution predictors.

All arithmetic is exact: c is a rational built from the initial state, and
floor/ceil are taken on the rational, so integral averages are never
misclassified by float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .graph import Graph

__all__ = [
    "Prediction",
    "initial_average",
    "predict_expander",
    "predict_two_value",
    "predict_ordered_path",
    "completion_bound",
]


@dataclass(frozen=True)
class Prediction:
    """Predicted winning distribution with its provenance.

    regime is one of 'expander', 'ordered-path', 'two-value', 'unknown';
    floor_pair brackets c for the expander regime.
    """

    distribution: dict           # opinion -> Fraction
    c: Fraction
    floor_pair: tuple
    regime: str

    def __post_init__(self):
        total = sum(self.distribution.values())
        if total != 1:
            raise ValueError(f"prediction mass sums to {total}, not 1")
        if any(p < 0 for p in self.distribution.values()):
            raise ValueError("negative prediction mass")

    def mean(self) -> Fraction:
        return sum(op * p for op, p in self.distribution.items())

    def to_dict(self) -> dict:
        return {
            "distribution": {str(op): float(p) for op, p in sorted(self.distribution.items())},
            "c": float(self.c),
            "c_exact": [self.c.numerator, self.c.denominator],
            "floor_pair": list(self.floor_pair),
            "regime": self.regime,
        }


def initial_average(g: Graph, opinions, variant: str) -> Fraction:
    """Exact initial average: S(0)/n for the edge process, Z(0)/n for vertex
    processes (= sum d(v) X_v / 2m)."""
    if variant == "async-edge":
        return Fraction(int(sum(int(v) for v in opinions)), g.n)
    s = 0
    for v, op in enumerate(opinions):
        s += int(g.degrees[v]) * int(op)
    return Fraction(s, 2 * g.m)


def predict_expander(c) -> Prediction:
    """Two-point law on the integers bracketing c: mass i+1-c on i = floor(c)
    and c-i on i+1; a point mass when c is integral."""
    c = Fraction(c)
    i = math.floor(c)
    if c == i:
        dist = {i: Fraction(1)}
    else:
        dist = {i: Fraction(i + 1) - c, i + 1: c - i}
    return Prediction(distribution=dist, c=c, floor_pair=(i, i + 1), regime="expander")


def predict_two_value(g: Graph, opinions, variant: str) -> Prediction:
    """Exact two-value law: P(i wins) = N_i/n (edge) or d(A_i)/2m (vertex)."""
    counts: dict = {}
    dsum: dict = {}
    for v, op in enumerate(opinions):
        op = int(op)
        counts[op] = counts.get(op, 0) + 1
        dsum[op] = dsum.get(op, 0) + int(g.degrees[v])
    ops = sorted(counts)
    if len(ops) != 2:
        raise ValueError(f"need exactly two opinions present, got {ops}")
    if ops[1] - ops[0] != 1:
        raise ValueError(f"opinions must be adjacent, got {ops}")
    if variant == "async-edge":
        dist = {op: Fraction(counts[op], g.n) for op in ops}
    elif variant in ("async-vertex", "sync-vertex"):
        dist = {op: Fraction(dsum[op], 2 * g.m) for op in ops}
    else:
        raise ValueError(f"no two-value law for variant {variant!r}")
    c = initial_average(g, opinions, variant)
    return Prediction(distribution=dist, c=c,
                      floor_pair=(ops[0], ops[1]), regime="two-value")


def predict_ordered_path(a, b) -> Prediction:
    """Ordered-path law over opinions {0,1,2} for zero-fraction a and
    two-fraction b: (a(1-b), ab+(1-a)(1-b), (1-a)b)."""
    a = Fraction(a)
    b = Fraction(b)
    if a < 0 or b < 0 or a + b > 1:
        raise ValueError(f"infeasible fractions a={a}, b={b}")
    dist = {0: a * (1 - b), 1: a * b + (1 - a) * (1 - b), 2: (1 - a) * b}
    c = 0 * dist[0] + 1 * dist[1] + 2 * dist[2]
    i = math.floor(c)
    return Prediction(distribution=dist, c=c, floor_pair=(i, i + 1),
                      regime="ordered-path")


def completion_bound(k: int, t2) -> float:
    """Comparison ceiling k * T_2-vote for measured completion times."""
    if k < 2:
        raise ValueError("need at least two opinions")
    return k * t2
