"""Numba kernels: trial loops and exact count-engine samplers.

The kernels consume numpy Generator streams with the same draw order as the
pure-Python step functions in `dynamics`, so a trial run through a kernel is
bit-for-bit the trajectory the step functions would produce (numba's
Generator.integers/.random match numpy's output exactly).

Binomial sampling is exact: inversion for n*p < 10, else the BTRS transformed
rejection sampler (the acceptance bound is the exact pmf ratio, no normal
approximation).  Multinomial splits use sequential conditional binomials.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

STATUS_CONSENSUS = 0
STATUS_CAPPED = 1


# ---------------------------------------------------------------------------
# exact binomial / trinomial sampling
# ---------------------------------------------------------------------------

@njit(cache=True)
def _stirling_tail(k):
    # log(k!) minus Stirling main term, exact tail expansion
    table = (0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
             0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
             0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
             0.008330563433362871)
    if k <= 9:
        return table[k]
    kp1sq = (k + 1.0) * (k + 1.0)
    return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / (k + 1.0)


@njit(cache=True)
def _binomial_inversion(rng, n, p):
    # exact inversion by pmf recurrence; restart on float underrun, as in
    # the classical implementations
    q = 1.0 - p
    s = p / q
    a = (n + 1.0) * s
    bound = min(n, int(n * p + 10.0 * math.sqrt(n * p * q + 1.0)) + 1)
    while True:
        r = math.exp(n * math.log(q))
        u = rng.random()
        x = 0
        failed = False
        while u > r:
            u -= r
            x += 1
            if x > bound or r <= 0.0:
                failed = True
                break
            r *= a / x - s
        if not failed:
            return x


@njit(cache=True)
def _binomial_btrs(rng, n, p):
    # Hoermann's BTRS rejection sampler; exact for p <= 0.5, n*p >= 10
    stddev = math.sqrt(n * p * (1.0 - p))
    b = 1.15 + 2.53 * stddev
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = n * p + 0.5
    v_r = 0.92 - 4.2 / b
    r = p / (1.0 - p)
    alpha = (2.83 + 5.1 / b) * stddev
    m = int(math.floor((n + 1) * p))
    while True:
        u = rng.random() - 0.5
        v = rng.random()
        us = 0.5 - abs(u)
        k = int(math.floor((2.0 * a / us + b) * u + c))
        if k < 0 or k > n:
            continue
        if us >= 0.07 and v <= v_r:
            return k
        v2 = math.log(v * alpha / (a / (us * us) + b))
        ub = ((m + 0.5) * math.log((m + 1.0) / (r * (n - m + 1.0)))
              + (n + 1.0) * math.log((n - m + 1.0) / (n - k + 1.0))
              + (k + 0.5) * math.log(r * (n - k + 1.0) / (k + 1.0))
              + _stirling_tail(m) + _stirling_tail(n - m)
              - _stirling_tail(k) - _stirling_tail(n - k))
        if v2 <= ub:
            return k


@njit(cache=True)
def binomial(rng, n, p):
    """Exact Binomial(n, p) draw."""
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    if p > 0.5:
        q = 1.0 - p
        if n * q < 10.0:
            return n - _binomial_inversion(rng, n, q)
        return n - _binomial_btrs(rng, n, q)
    if n * p < 10.0:
        return _binomial_inversion(rng, n, p)
    return _binomial_btrs(rng, n, p)


@njit(cache=True)
def trinomial(rng, cnt, p_down, p_up):
    """Split cnt holders into (down, stay, up) by sequential conditional binomials."""
    down = binomial(rng, cnt, p_down)
    rem = cnt - down
    denom = 1.0 - p_down
    if denom <= 0.0 or rem <= 0:
        return down, 0
    p2 = p_up / denom
    if p2 > 1.0:
        p2 = 1.0
    up = binomial(rng, rem, p2)
    return down, up


# ---------------------------------------------------------------------------
# general-graph trial loops
# ---------------------------------------------------------------------------


@njit(cache=True)
def _record_cp(cp, ncp, t, s, zs, distinct, lo, cur_min, cur_max):
    cp[ncp, 0] = t
    cp[ncp, 1] = s
    cp[ncp, 2] = zs
    cp[ncp, 3] = distinct
    cp[ncp, 4] = lo + cur_min
    cp[ncp, 5] = lo + cur_max
    return ncp + 1


@njit(cache=True)
def trial_async(edges_u, edges_v, adj_flat, adj_off, degrees,
                x, lo, width, edge_variant,
                max_steps, stride, rng,
                elim_vals, elim_steps, cp):
    """Asynchronous trial loop (edge or vertex scheduler).

    Mutates x in place; returns
    (status, winner, consensus_step, final3, final2, n_elim, steps, ncp).
    Steps are indexed so the state after step t is state(t); events carry the
    step at which they first hold.
    """
    n = x.shape[0]
    m = edges_u.shape[0]
    counts = np.zeros(width, dtype=np.int64)
    s = np.int64(0)
    zs = np.int64(0)
    for v in range(n):
        counts[x[v] - lo] += 1
        s += x[v]
        zs += degrees[v] * x[v]
    cur_min = 0
    while counts[cur_min] == 0:
        cur_min += 1
    cur_max = width - 1
    while counts[cur_max] == 0:
        cur_max -= 1
    distinct = 0
    for i in range(width):
        if counts[i] > 0:
            distinct += 1
    n_elim = 0
    final3 = -1
    final2 = -1
    consensus = -1
    winner = 0
    if cur_max - cur_min <= 2:
        final3 = 0
    if cur_max - cur_min <= 1:
        final2 = 0
    if counts[cur_min] == n:
        consensus = 0
        winner = lo + cur_min
    ncp = _record_cp(cp, 0, 0, s, zs, distinct, lo, cur_min, cur_max)
    t = 0
    while consensus < 0 and t < max_steps:
        if edge_variant:
            e = rng.integers(0, m)
            side = rng.integers(0, 2)
            if side == 0:
                ch = edges_u[e]
                ob = edges_v[e]
            else:
                ch = edges_v[e]
                ob = edges_u[e]
        else:
            ch = rng.integers(0, n)
            j = rng.integers(0, degrees[ch])
            ob = adj_flat[adj_off[ch] + j]
        t += 1
        d = x[ob] - x[ch]
        if d != 0:
            delta = 1 if d > 0 else -1
            oi = x[ch] - lo
            ni = oi + delta
            counts[oi] -= 1
            if counts[oi] == 0:
                distinct -= 1
            if counts[ni] == 0:
                distinct += 1
            counts[ni] += 1
            x[ch] += delta
            s += delta
            zs += delta * degrees[ch]
            if counts[oi] == 0 and oi == cur_min:
                while counts[cur_min] == 0 and cur_min < cur_max:
                    elim_vals[n_elim] = lo + cur_min
                    elim_steps[n_elim] = t
                    n_elim += 1
                    cur_min += 1
            elif counts[oi] == 0 and oi == cur_max:
                while counts[cur_max] == 0 and cur_max > cur_min:
                    elim_vals[n_elim] = lo + cur_max
                    elim_steps[n_elim] = t
                    n_elim += 1
                    cur_max -= 1
            if final3 < 0 and cur_max - cur_min <= 2:
                final3 = t
            if final2 < 0 and cur_max - cur_min <= 1:
                final2 = t
            if counts[ni] == n:
                consensus = t
                winner = lo + ni
        if stride > 0 and t % stride == 0 and consensus < 0:
            ncp = _record_cp(cp, ncp, t, s, zs, distinct, lo, cur_min, cur_max)
    ncp = _record_cp(cp, ncp, t, s, zs, distinct, lo, cur_min, cur_max)
    status = STATUS_CONSENSUS if consensus >= 0 else STATUS_CAPPED
    return status, winner, consensus, final3, final2, n_elim, t, ncp


@njit(cache=True)
def trial_sync(adj_flat, adj_off, degrees,
               x, lo, width, propensity, use_propensity,
               max_steps, stride, rng,
               elim_vals, elim_steps, cp):
    """Synchronous trial loop; one step = one full round against a frozen snapshot."""
    n = x.shape[0]
    counts = np.zeros(width, dtype=np.int64)
    s = np.int64(0)
    zs = np.int64(0)
    for v in range(n):
        counts[x[v] - lo] += 1
        s += x[v]
        zs += degrees[v] * x[v]
    cur_min = 0
    while counts[cur_min] == 0:
        cur_min += 1
    cur_max = width - 1
    while counts[cur_max] == 0:
        cur_max -= 1
    distinct = 0
    for i in range(width):
        if counts[i] > 0:
            distinct += 1
    n_elim = 0
    final3 = -1
    final2 = -1
    consensus = -1
    winner = 0
    if cur_max - cur_min <= 2:
        final3 = 0
    if cur_max - cur_min <= 1:
        final2 = 0
    if counts[cur_min] == n:
        consensus = 0
        winner = lo + cur_min
    ncp = _record_cp(cp, 0, 0, s, zs, distinct, lo, cur_min, cur_max)
    dx = np.zeros(n, dtype=np.int8)
    t = 0
    while consensus < 0 and t < max_steps:
        for v in range(n):
            move = True
            if use_propensity:
                move = rng.random() < propensity[v]
            if move:
                j = rng.integers(0, degrees[v])
                w = adj_flat[adj_off[v] + j]
                d = x[w] - x[v]
                dx[v] = 1 if d > 0 else (-1 if d < 0 else 0)
            else:
                dx[v] = 0
        t += 1
        for v in range(n):
            if dx[v] != 0:
                oi = x[v] - lo
                ni = oi + dx[v]
                counts[oi] -= 1
                if counts[oi] == 0:
                    distinct -= 1
                if counts[ni] == 0:
                    distinct += 1
                counts[ni] += 1
                x[v] += dx[v]
                s += dx[v]
                zs += dx[v] * degrees[v]
        while counts[cur_min] == 0 and cur_min < cur_max:
            elim_vals[n_elim] = lo + cur_min
            elim_steps[n_elim] = t
            n_elim += 1
            cur_min += 1
        while counts[cur_max] == 0 and cur_max > cur_min:
            elim_vals[n_elim] = lo + cur_max
            elim_steps[n_elim] = t
            n_elim += 1
            cur_max -= 1
        if final3 < 0 and cur_max - cur_min <= 2:
            final3 = t
        if final2 < 0 and cur_max - cur_min <= 1:
            final2 = t
        if counts[cur_min] == n:
            consensus = t
            winner = lo + cur_min
        if stride > 0 and t % stride == 0 and consensus < 0:
            ncp = _record_cp(cp, ncp, t, s, zs, distinct, lo, cur_min, cur_max)
    ncp = _record_cp(cp, ncp, t, s, zs, distinct, lo, cur_min, cur_max)
    status = STATUS_CONSENSUS if consensus >= 0 else STATUS_CAPPED
    return status, winner, consensus, final3, final2, n_elim, t, ncp


# ---------------------------------------------------------------------------
# complete-graph count engines
# ---------------------------------------------------------------------------


@njit(cache=True)
def sync_counts_round(counts, newc, n, self_obs, rng):
    """One synchronous round on opinion counts (complete graph).

    Each opinion class splits multinomially over (down, stay, up) with
    probabilities proportional to the mass below / at / above it.  With
    self_obs the observed vertex is uniform over all n (a vertex may sample
    itself, a no-op); otherwise uniform over the n-1 others.
    """
    k = counts.shape[0]
    for i in range(k):
        newc[i] = 0
    below = 0
    for i in range(k):
        ci = counts[i]
        above = n - below - ci
        if ci > 0:
            if self_obs:
                pd = below / n
                pu = above / n
            else:
                pd = below / (n - 1.0)
                pu = above / (n - 1.0)
            down, up = trinomial(rng, ci, pd, pu)
            if down > 0:
                newc[i - 1] += down
            newc[i] += ci - down - up
            if up > 0:
                newc[i + 1] += up
        below += ci
    for i in range(k):
        counts[i] = newc[i]


@njit(cache=True)
def async_counts_step(counts, n, self_obs, rng):
    """One asynchronous step on counts: chooser class by mass, observed class
    by mass (minus the chooser itself when self_obs is False)."""
    k = counts.shape[0]
    a = rng.integers(0, n)
    acc = np.int64(0)
    ci = 0
    for i in range(k):
        acc += counts[i]
        if a < acc:
            ci = i
            break
    if self_obs:
        b = rng.integers(0, n)
    else:
        b = rng.integers(0, n - 1)
    acc = np.int64(0)
    oj = 0
    for j in range(k):
        cj = counts[j] - (1 if (not self_obs and j == ci) else 0)
        acc += cj
        if b < acc:
            oj = j
            break
    if oj != ci:
        delta = 1 if oj > ci else -1
        counts[ci] -= 1
        counts[ci + delta] += 1
        return ci, oj
    return -1, -1


@njit(cache=True)
def count_trial(counts0, lo, sync, max_steps, stride, self_obs, rng,
                elim_vals, elim_steps, cp_t, cp_counts):
    """Count-engine trial (sync rounds or async steps) with event tracking.

    Returns (status, winner, consensus_step, final3, final2, n_elim, steps, ncp).
    """
    k = counts0.shape[0]
    counts = counts0.copy()
    newc = np.zeros(k, dtype=np.int64)
    n = np.int64(0)
    for i in range(k):
        n += counts[i]
    cur_min = 0
    while counts[cur_min] == 0:
        cur_min += 1
    cur_max = k - 1
    while counts[cur_max] == 0:
        cur_max -= 1
    n_elim = 0
    final3 = -1
    final2 = -1
    consensus = -1
    winner = 0
    if cur_max - cur_min <= 2:
        final3 = 0
    if cur_max - cur_min <= 1:
        final2 = 0
    if counts[cur_min] == n:
        consensus = 0
        winner = lo + cur_min
    ncp = 0
    cp_t[ncp] = 0
    for i in range(k):
        cp_counts[ncp, i] = counts[i]
    ncp += 1
    t = 0
    while consensus < 0 and t < max_steps:
        if sync:
            sync_counts_round(counts, newc, n, self_obs, rng)
        else:
            async_counts_step(counts, n, self_obs, rng)
        t += 1
        while counts[cur_min] == 0 and cur_min < cur_max:
            elim_vals[n_elim] = lo + cur_min
            elim_steps[n_elim] = t
            n_elim += 1
            cur_min += 1
        while counts[cur_max] == 0 and cur_max > cur_min:
            elim_vals[n_elim] = lo + cur_max
            elim_steps[n_elim] = t
            n_elim += 1
            cur_max -= 1
        if final3 < 0 and cur_max - cur_min <= 2:
            final3 = t
        if final2 < 0 and cur_max - cur_min <= 1:
            final2 = t
        if counts[cur_min] == n:
            consensus = t
            winner = lo + cur_min
        if stride > 0 and t % stride == 0 and consensus < 0:
            cp_t[ncp] = t
            for i in range(k):
                cp_counts[ncp, i] = counts[i]
            ncp += 1
    cp_t[ncp] = t
    for i in range(k):
        cp_counts[ncp, i] = counts[i]
    ncp += 1
    status = STATUS_CONSENSUS if consensus >= 0 else STATUS_CAPPED
    return status, winner, consensus, final3, final2, n_elim, t, ncp
