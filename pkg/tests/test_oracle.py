from fractions import Fraction

import numpy as np
import pytest

from incvote.dynamics import ordered_path_opinions
from incvote.graph import from_edges, make_complete, make_path, sample_gnp
from incvote.oracle import (AbsorbingChain, ChainTooLargeError,
                            NonAbsorbingChainError, build_full_process_chain,
                            export_chain_csv, gambler_ruin,
                            one_step_state_distribution,
                            path_reduced_walk_chain, solve_absorption)
from incvote.theory import initial_average


def unbiased_walk_chain(length):
    rows = []
    for i in range(length + 1):
        if i in (0, length):
            rows.append({i: 1.0})
        else:
            rows.append({i - 1: 0.5, i + 1: 0.5})
    return AbsorbingChain(states=list(range(length + 1)), rows=rows,
                          labels={0: 0, length: 1})


def random_connected(rng, n_lo=4, n_hi=9):
    while True:
        n = int(rng.integers(n_lo, n_hi + 1))
        g = sample_gnp(n, float(rng.uniform(0.4, 0.9)), seed=int(rng.integers(2 ** 31)))
        if g.m and int(g.degrees.min()) > 0:
            return g


def test_absorbing_start():
    ch = unbiased_walk_chain(4)
    res = solve_absorption(ch, 0)
    assert res.probabilities == {0: 1.0}
    assert res.expected_steps == 0.0


def test_symmetric_walk_exact():
    ch = unbiased_walk_chain(4)
    res = solve_absorption(ch, 2)
    assert abs(res.probabilities[0] - 0.5) < 1e-12
    assert abs(res.probabilities[1] - 0.5) < 1e-12
    assert abs(res.expected_steps - 4.0) < 1e-10  # z(L-z) with z=2, L=4


def test_solver_rejects_bad_rows():
    bad = AbsorbingChain(states=[0, 1], rows=[{0: 0.7}, {1: 1.0}], labels={1: 1})
    with pytest.raises(ValueError):
        solve_absorption(bad, 0)


def test_solver_detects_non_absorbing():
    # two transient states cycling forever, never reaching the labelled state
    ch = AbsorbingChain(states=[0, 1, 2],
                        rows=[{1: 1.0}, {0: 1.0}, {2: 1.0}],
                        labels={2: 7})
    with pytest.raises(NonAbsorbingChainError):
        solve_absorption(ch, 0)


def test_gambler_unbiased_closed_forms():
    r = gambler_ruin(3, 10, Fraction(1, 2))
    assert r.ruin_prob == Fraction(7, 10)
    assert r.expected_duration == 21
    assert r.duration_bound is None
    assert gambler_ruin(0, 5, Fraction(1, 2)).ruin_prob == 1
    assert gambler_ruin(5, 5, Fraction(1, 2)).ruin_prob == 0
    with pytest.raises(ValueError):
        gambler_ruin(1, 0, Fraction(1, 2))
    with pytest.raises(ValueError):
        gambler_ruin(6, 5, Fraction(1, 2))


def test_gambler_biased_exact():
    r = gambler_ruin(1, 3, Fraction(2, 3))
    assert r.ruin_prob == Fraction(6, 7)
    assert r.duration_bound == Fraction(1) / Fraction(1, 3)
    # exact duration against a rational chain solve
    q = Fraction(2, 3)
    chain = AbsorbingChain(
        states=[0, 1, 2, 3],
        rows=[{0: Fraction(1)}, {0: q, 2: 1 - q}, {1: q, 3: 1 - q}, {3: Fraction(1)}],
        labels={0: 0, 3: 1})
    res = solve_absorption(chain, 1, method="rational")
    assert res.probabilities[0] == Fraction(6, 7)
    assert res.expected_steps == r.expected_duration
    # duration never exceeds the z/(q-p) bound
    for z in range(1, 8):
        rr = gambler_ruin(z, 8, Fraction(3, 4))
        assert rr.expected_duration <= rr.duration_bound


def test_gambler_float_matches_closed_form():
    q = 0.63
    lgt = 40
    r = gambler_ruin(7, lgt, q)
    ratio = q / (1 - q)
    expect = (ratio ** lgt - ratio ** 7) / (ratio ** lgt - 1)
    assert abs(r.ruin_prob - expect) < 1e-12
    # duration closed form: z/(q-p) - (L/(q-p)) (1-r^z)/(1-r^L)
    p = 1 - q
    dur = 7 / (q - p) - (lgt / (q - p)) * (1 - ratio ** 7) / (1 - ratio ** lgt)
    assert abs(r.expected_duration - dur) < 1e-8


def test_triangle_chain_canonical_instance():
    chain = path_reduced_walk_chain(25, 5, 20)
    res = solve_absorption(chain, (5, 20))
    assert abs(res.probabilities[0] - 1 / 25) < 1e-12
    assert abs(res.probabilities[1] - 8 / 25) < 1e-12
    assert abs(res.probabilities[2] - 16 / 25) < 1e-12
    # already absorbed start
    there = solve_absorption(path_reduced_walk_chain(10, 10, 0), (10, 0))
    assert there.probabilities[0] == 1.0


def test_triangle_chain_exact_rational():
    chain = path_reduced_walk_chain(8, 2, 3, exact=True)
    res = solve_absorption(chain, (2, 3), method="rational")
    a, b = Fraction(2, 8), Fraction(3, 8)
    assert res.probabilities[0] == a * (1 - b)
    assert res.probabilities[1] == a * b + (1 - a) * (1 - b)
    assert res.probabilities[2] == (1 - a) * b


def test_triangle_matches_product_form_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 61))
        i0 = int(rng.integers(0, n + 1))
        j0 = int(rng.integers(0, n + 1 - i0))
        res = solve_absorption(path_reduced_walk_chain(n, i0, j0), (i0, j0))
        a, b = i0 / n, j0 / n
        assert abs(res.probabilities.get(0, 0.0) - a * (1 - b)) < 1e-9
        assert abs(res.probabilities.get(1, 0.0) - (a * b + (1 - a) * (1 - b))) < 1e-9
        assert abs(res.probabilities.get(2, 0.0) - (1 - a) * b) < 1e-9


def test_triangle_rejects_infeasible():
    with pytest.raises(ValueError):
        path_reduced_walk_chain(10, 6, 5)


def test_full_chain_k2():
    g = make_complete(2)
    chain = build_full_process_chain(g, "async-edge", (0, 1), exact=True)
    assert chain.size == 3
    res = solve_absorption(chain, (0, 1), method="rational")
    assert res.probabilities == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    assert res.expected_steps == 1


def test_full_chain_all_equal_initial():
    g = make_complete(3)
    chain = build_full_process_chain(g, "async-edge", (4, 4, 4))
    assert chain.size == 1
    assert solve_absorption(chain, (4, 4, 4)).probabilities == {4: 1.0}


def test_full_chain_cap():
    g = make_complete(6)
    with pytest.raises(ChainTooLargeError):
        build_full_process_chain(g, "async-edge", (1, 2, 3, 4, 5, 6), cap=10)


def test_reduced_equals_full_on_paths():
    for n in range(2, 8):
        g = make_path(n)
        for i0 in range(n + 1):
            for j0 in range(n + 1 - i0):
                x0 = ordered_path_opinions(n, i0, j0)
                tri = solve_absorption(path_reduced_walk_chain(n, i0, j0),
                                       (i0, j0)).probabilities
                full = solve_absorption(
                    build_full_process_chain(g, "async-edge", x0),
                    tuple(int(v) for v in x0)).probabilities
                for op in (0, 1, 2):
                    assert abs(tri.get(op, 0.0) - full.get(op, 0.0)) < 1e-9


def test_two_value_law_exact():
    # two-value law: edge process N_i/n, vertex process d(A_i)/2m
    rng = np.random.default_rng(8)
    for _ in range(6):
        g = random_connected(rng, 4, 8)
        x = rng.integers(0, 2, size=g.n)
        if len(set(x.tolist())) < 2:
            x[0] = 1 - x[0]
        counts = {op: int((x == op).sum()) for op in (0, 1)}
        dsum = {op: int(g.degrees[x == op].sum()) for op in (0, 1)}
        e = solve_absorption(build_full_process_chain(g, "async-edge", x),
                             tuple(int(v) for v in x))
        for op in (0, 1):
            assert abs(e.probabilities.get(op, 0.0) - counts[op] / g.n) < 1e-10
        v = solve_absorption(build_full_process_chain(g, "async-vertex", x),
                             tuple(int(v) for v in x))
        for op in (0, 1):
            assert abs(v.probabilities.get(op, 0.0) - dsum[op] / (2 * g.m)) < 1e-10


def test_star_two_value_vertex_frozen():
    # star K_{1,9}: centre holds 1, leaves hold 0; P(1 wins) = 9/18 = 1/2
    star = from_edges(10, [(0, i) for i in range(1, 10)])
    x = (1,) + (0,) * 9
    res = solve_absorption(build_full_process_chain(star, "async-vertex", x), x)
    assert abs(res.probabilities[1] - 0.5) < 1e-10


def test_mean_winner_identity_exact_solves():
    # absorption-weighted mean winning value equals the exact initial average
    rng = np.random.default_rng(9)
    instances = []
    g = make_path(6)
    instances.append((g, tuple(ordered_path_opinions(6, 2, 3)), "async-edge"))
    instances.append((make_complete(4), (1, 2, 3, 4), "async-edge"))
    instances.append((make_complete(4), (1, 2, 3, 4), "async-vertex"))
    gg = random_connected(rng, 5, 7)
    instances.append((gg, tuple(int(v) for v in rng.integers(0, 3, gg.n)), "async-vertex"))
    star = from_edges(5, [(0, i) for i in range(1, 5)])
    instances.append((star, (2, 0, 0, 1, 1), "async-vertex"))
    for g, x, variant in instances:
        res = solve_absorption(build_full_process_chain(g, variant, x), x)
        c = float(initial_average(g, x, variant))
        assert abs(res.mean_label() - c) < 1e-10, (x, variant)


def test_sync_chain_small():
    g = make_complete(2)
    chain = build_full_process_chain(g, "sync-vertex", (0, 2), exact=True)
    res = solve_absorption(chain, (0, 2), method="rational")
    assert res.probabilities == {1: Fraction(1)}
    star = from_edges(4, [(0, 1), (0, 2), (0, 3)])
    chain2 = build_full_process_chain(star, "sync-vertex", (0, 2, 2, 2))
    res2 = solve_absorption(chain2, (0, 2, 2, 2))
    assert abs(res2.probabilities[1] - 1.0) < 1e-12


def test_generalized_chain_needs_propensity():
    g = make_complete(2)
    with pytest.raises(ValueError):
        build_full_process_chain(g, "generalized", (0, 1))
    chain = build_full_process_chain(g, "generalized", (0, 1), exact=True,
                                     propensity=[Fraction(1, 2), Fraction(1, 2)])
    res = solve_absorption(chain, (0, 1), method="rational")
    assert res.probabilities[0] + res.probabilities[1] == 1


def test_edge_process_equals_pi_biased_vertex_chooser():
    # footnote equivalence as one-step law equality, exact
    rng = np.random.default_rng(10)
    for _ in range(8):
        g = random_connected(rng, 3, 7)
        x = rng.integers(0, 4, size=g.n)
        edge_law = one_step_state_distribution(g, x, "async-edge")
        biased = one_step_state_distribution(g, x, "async-vertex-pi-chooser")
        assert edge_law == biased


def test_export_chain_csv():
    ch = unbiased_walk_chain(2)
    text = export_chain_csv(ch)
    lines = text.strip().splitlines()
    assert lines[0] == "row,col,prob"
    assert "1,0,0.5" in lines and "1,2,0.5" in lines
