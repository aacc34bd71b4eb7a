"""Random-graph expansion checks behind the two-point winning law.

The two-point winning law on G(n,p) rests on three combinatorial properties:
near-regular degrees (P1), plenty of edges between any two large sets (P2)
and few edges inside any small set (P3).  This demo samples one graph above
the connectivity threshold and measures all three directly.
"""

import math

import numpy as np

from incvote import check_p1, check_p2, check_p3, graph_stats, sample_gnp

n, p = 4000, 0.05
g = sample_gnp(n, p, seed=12)
stats = graph_stats(g)
print(f"G({n}, {p}) sample: m = {g.m}, connected = {stats.connected}, "
      f"degrees {stats.min_degree}..{stats.max_degree}")

rep1 = check_p1(g, p)
print(f"\nP1 almost-regular: max |d(v) - (n-1)p| / sqrt(np ln n) = "
      f"{rep1.degree_dev_max:.3f} (band ok: {rep1.degree_band_ok}); "
      f"pi deviation stat {rep1.pi_dev_max:.3f}")

rng = np.random.default_rng(0)
delta = 5.0 / math.sqrt(n * p)
size = math.ceil(delta * n)
hits = 0
pairs = 50
for _ in range(pairs):
    perm = rng.permutation(n)
    rep = check_p2(g, perm[:size], perm[size:2 * size], p)
    hits += rep.within_band
print(f"\nP2 edges between large sets (|A| = |B| = {size}): "
      f"{hits}/{pairs} random pairs inside [mu/2, 3mu/2]")

s = int(n / math.log(n))
worst_ratio = 0.0
ok = 0
sets = 50
for _ in range(sets):
    perm = rng.permutation(n)
    rep = check_p3(g, perm[:s], p)
    ok += rep.bound_i_ok
    worst_ratio = max(worst_ratio, rep.ratio)
print(f"P3 few edges inside small sets (|S| = {s}): {ok}/{sets} under e^2 s^2 p; "
      f"worst inside/boundary ratio {worst_ratio:.4f}")
