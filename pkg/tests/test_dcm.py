import itertools
import math

import numpy as np
import pytest

from voterlab.dcm import (
    Digraph,
    _build,
    from_edge_csv,
    is_strongly_connected,
    out_ball_is_tree,
    sample,
    structure_report,
)
from voterlab.degree_model import BiDegreeSequence, gen_regular, gen_uniform_range


def two_cycle():
    return _build(2, np.array([0, 1]), np.array([1, 0]))


def test_degree_preservation():
    seq = gen_uniform_range(500, 2, 5, seed=2)
    g = sample(seq, 42)
    out_deg = g.out_off[1:] - g.out_off[:-1]
    in_deg = g.in_off[1:] - g.in_off[:-1]
    assert np.array_equal(out_deg, seq.out_deg)
    assert np.array_equal(in_deg, seq.in_deg)
    assert g.m == seq.m and len(g.edges) == seq.m


def test_transpose_consistency():
    seq = gen_uniform_range(200, 2, 4, seed=5)
    g = sample(seq, 9)
    rebuilt = [[] for _ in range(g.n)]
    for t, h in g.edges:
        rebuilt[h].append(t)
    flat = [v for lst in rebuilt for v in sorted(lst)]
    stored = [
        v
        for x in range(g.n)
        for v in sorted(g.in_flat[g.in_off[x]:g.in_off[x + 1]].tolist())
    ]
    assert flat == stored


def test_determinism():
    seq = gen_regular(100, 3)
    g1 = sample(seq, 1234)
    g2 = sample(seq, 1234)
    assert np.array_equal(g1.edges, g2.edges)
    assert not np.array_equal(g1.edges, sample(seq, 1235).edges)


def test_self_loop_probability_matches_enumeration():
    # in=(2,2), out=(2,2): exhaustive enumeration over the 4! pairings of
    # the event that both edges of vertex 0 are self-loops
    heads = [0, 0, 1, 1]
    hits = 0
    for perm in itertools.permutations(range(4)):
        h = [heads[p] for p in perm]
        if h[0] == 0 and h[1] == 0:  # tails 0,1 belong to vertex 0
            hits += 1
    exact = hits / math.factorial(4)
    assert abs(exact - 1 / 6) < 1e-15

    seq = BiDegreeSequence(np.array([2, 2]), np.array([2, 2]))
    rng = np.random.default_rng(77)
    n_trials = 30000
    count = 0
    for _ in range(n_trials):
        g = sample(seq, rng)
        if g.out_flat[0] == 0 and g.out_flat[1] == 0:
            count += 1
    p = count / n_trials
    se = math.sqrt(exact * (1 - exact) / n_trials)
    assert abs(p - exact) < 4 * se


def test_pairing_uniformity_smoke():
    # n=3 with distinct head owners: the observed head order identifies the
    # permutation; all 3! outcomes equally likely within 4-sigma bands
    seq = BiDegreeSequence(np.array([1, 1, 1]), np.array([1, 1, 1]))
    rng = np.random.default_rng(123)
    counts = {}
    N = 60000
    for _ in range(N):
        g = sample(seq, rng)
        counts[tuple(g.out_flat.tolist())] = counts.get(tuple(g.out_flat.tolist()), 0) + 1
    assert len(counts) == 6
    p = 1 / 6
    band = 4 * math.sqrt(p * (1 - p) / N)
    for c in counts.values():
        assert abs(c / N - p) < band


def test_is_strongly_connected_toy():
    assert is_strongly_connected(two_cycle())
    # 0 -> 1 twice, 1 absorbing via self-loops: no path back to 0
    g = _build(2, np.array([0, 0, 1, 1]), np.array([1, 1, 1, 1]))
    assert not is_strongly_connected(g)
    g1 = _build(1, np.array([0]), np.array([0]))
    assert is_strongly_connected(g1)


def test_strong_connectivity_whp():
    seq = gen_uniform_range(1000, 2, 5, seed=4)
    ok = sum(is_strongly_connected(sample(seq, s)) for s in range(100))
    assert ok >= 99


def test_out_ball_is_tree():
    g = two_cycle()
    assert out_ball_is_tree(g, 0, 0)
    assert out_ball_is_tree(g, 0, 1)
    assert not out_ball_is_tree(g, 0, 2)  # returns to the root
    loop = _build(1, np.array([0]), np.array([0]))
    assert not out_ball_is_tree(loop, 0, 1)


def test_structure_report_toys():
    rep = structure_report(two_cycle(), BiDegreeSequence(np.array([1, 1]), np.array([1, 1])))
    assert rep.self_loops == 0
    assert rep.strongly_connected

    seq1 = BiDegreeSequence(np.array([2]), np.array([2]))
    rep1 = structure_report(sample(seq1, 0), seq1)
    assert rep1.self_loops == 2  # forced pairing
    assert rep1.multi_edge_pairs == 1


def test_tree_fraction_large():
    seq = gen_uniform_range(10000, 2, 5, seed=6)
    fracs = []
    for s in range(20):
        g = sample(seq, s)
        rep = structure_report(g, seq)
        fracs.append(rep.tree_fraction_at_h)
        assert rep.h_used == max(1, int(math.log(10000) / (5 * math.log(5))))
    assert np.mean(fracs) >= 0.95


def test_edge_csv_roundtrip(tmp_path):
    seq = gen_regular(50, 3)
    g = sample(seq, 3)
    path = tmp_path / "edges.csv"
    g.edges_to_csv(path)
    back = from_edge_csv(path, seq)
    assert np.array_equal(np.sort(back.edges, axis=0), np.sort(g.edges, axis=0))
    wrong = gen_regular(50, 4)
    with pytest.raises(ValueError):
        from_edge_csv(path, wrong)
