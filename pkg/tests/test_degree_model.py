import json
import math

import numpy as np
import pytest

from voterlab.degree_model import (
    BiDegreeSequence,
    DegreeSequenceError,
    GenerationError,
    gen_out_regular,
    gen_regular,
    gen_uniform_range,
    stats,
    validate,
)


def naive_params(in_deg, out_deg):
    """Independent direct-summation oracle for the five statistics."""
    n = len(in_deg)
    m = sum(in_deg)
    delta = m / n
    beta = sum(d * d for d in in_deg) / m
    rho = sum(di / do for di, do in zip(in_deg, out_deg)) / m
    gamma = sum(di * di / do for di, do in zip(in_deg, out_deg)) / m
    theta = delta / ((gamma - rho) / (1 - rho) * (1 - math.sqrt(1 - rho)) / rho + beta - 1)
    return delta, beta, rho, gamma, theta


T4_IN = [2, 2, 3, 3]
T4_OUT = [2, 3, 2, 3]


def test_validate_t4():
    seq = BiDegreeSequence(np.array(T4_IN), np.array(T4_OUT))
    rep = validate(seq, require_assumption1=True)
    assert rep.ok and rep.sum_ok and rep.min_degree_ok
    assert seq.m == 10


def test_sum_mismatch_rejected():
    with pytest.raises(DegreeSequenceError):
        BiDegreeSequence(np.array([2, 2]), np.array([2, 3]))


def test_length_mismatch_rejected():
    with pytest.raises(DegreeSequenceError):
        BiDegreeSequence(np.array([2, 2, 2]), np.array([3, 3]))


def test_assumption1_min_degree():
    seq = BiDegreeSequence(np.array([1, 3]), np.array([2, 2]))
    rep = validate(seq, require_assumption1=True)
    assert not rep.ok and not rep.min_degree_ok
    # without the flag the sequence is structurally fine
    assert validate(seq).ok


def test_gen_regular():
    seq = gen_regular(4, 3)
    assert (seq.in_deg == 3).all() and (seq.out_deg == 3).all()
    assert seq.m == 12
    assert gen_regular(1, 2).m == 2
    with pytest.raises(GenerationError):
        gen_regular(5, 1)


def test_gen_regular_stats():
    p = stats(gen_regular(1000, 3))
    assert p.delta == 3.0
    assert abs(p.rho - 1 / 3) < 1e-12


def test_gen_uniform_range():
    seq = gen_uniform_range(1000, 2, 5, seed=7)
    assert validate(seq, require_assumption1=True).ok
    assert seq.in_deg.min() >= 2 and seq.in_deg.max() <= 5
    assert seq.out_deg.min() >= 2 and seq.out_deg.max() <= 5
    # determinism
    seq2 = gen_uniform_range(1000, 2, 5, seed=7)
    assert np.array_equal(seq.in_deg, seq2.in_deg)
    assert np.array_equal(seq.out_deg, seq2.out_deg)
    assert not np.array_equal(seq.in_deg, gen_uniform_range(1000, 2, 5, seed=8).in_deg)


def test_gen_uniform_range_degenerate():
    seq = gen_uniform_range(1, 2, 2, seed=0)
    assert seq.in_deg.tolist() == [2] and seq.out_deg.tolist() == [2]
    with pytest.raises(GenerationError):
        gen_uniform_range(10, 2, 1, seed=0)


def test_gen_out_regular():
    seq = gen_out_regular(4, 3, {3: 1.0}, seed=1)
    assert (seq.in_deg == 3).all() and (seq.out_deg == 3).all()
    seq = gen_out_regular(2000, 3, {2: 0.5, 4: 0.5}, seed=5)
    assert validate(seq, require_assumption1=True).ok
    assert (seq.out_deg == 3).all()
    # realized-sequence oracle: delta fixed by out-regularity, beta above
    # the regular value because the in-degrees vary
    d, b, r, g, th = naive_params(seq.in_deg.tolist(), seq.out_deg.tolist())
    p = stats(seq)
    assert p.delta == 3.0
    assert abs(p.beta - b) < 1e-12 and b > 3.0
    seq2 = gen_out_regular(2000, 3, {2: 0.5, 4: 0.5}, seed=5)
    assert np.array_equal(seq.in_deg, seq2.in_deg)


@pytest.mark.parametrize(
    "in_deg,out_deg",
    [
        (T4_IN, T4_OUT),
        ([3] * 10, [3] * 10),
        ([2] * 6, [2] * 6),
        ([2, 3, 4, 5, 2, 4], [3, 3, 4, 4, 2, 4]),
    ],
)
def test_stats_against_direct_summation(in_deg, out_deg):
    p = stats(BiDegreeSequence(np.array(in_deg), np.array(out_deg)))
    d, b, r, g, th = naive_params(in_deg, out_deg)
    assert abs(p.delta - d) < 1e-12
    assert abs(p.beta - b) < 1e-12
    assert abs(p.rho - r) < 1e-12
    assert abs(p.gamma - g) < 1e-12
    assert abs(p.theta - th) < 1e-12


def test_stats_frozen_values():
    # frozen from the direct-summation / closed-form oracle above
    p = stats(BiDegreeSequence(np.array(T4_IN), np.array(T4_OUT)))
    assert abs(p.delta - 2.5) < 1e-12
    assert abs(p.beta - 2.6) < 1e-12
    assert abs(p.rho - 0.4166666666666667) < 1e-12
    assert abs(p.gamma - 1.0833333333333333) < 1e-10
    assert abs(p.theta - 1.112116762913931) < 1e-9
    p3 = stats(gen_regular(100, 3))
    assert abs(p3.theta - 1.1762352225447121) < 1e-12
    p2 = stats(gen_regular(100, 2))
    assert abs(p2.theta - 1.2612038749637413) < 1e-12


def test_regular_identities():
    for d in (2, 3, 4, 6):
        p = stats(gen_regular(50, d))
        assert p.beta == float(d)
        assert abs(p.gamma - 1.0) < 1e-12
        assert abs(p.rho - 1.0 / d) < 1e-12
        assert p.delta == float(d)


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    seq = gen_uniform_range(300, 2, 5, seed=3)
    perm = rng.permutation(seq.n)
    p1 = stats(seq)
    p2 = stats(BiDegreeSequence(seq.in_deg[perm], seq.out_deg[perm]))
    for f in ("delta", "beta", "rho", "gamma", "theta"):
        assert abs(getattr(p1, f) - getattr(p2, f)) < 1e-12


def test_rho_at_least_one_flags_theta_undefined():
    seq = BiDegreeSequence(np.array([2, 0]), np.array([1, 1]))
    p = stats(seq)
    assert abs(p.rho - 1.0) < 1e-12
    assert not p.theta_defined


def test_csv_roundtrip(tmp_path):
    seq = gen_uniform_range(50, 2, 5, seed=9)
    path = tmp_path / "seq.csv"
    seq.to_csv(path)
    back = BiDegreeSequence.from_csv(path)
    assert np.array_equal(back.in_deg, seq.in_deg)
    assert np.array_equal(back.out_deg, seq.out_deg)


def test_theory_params_json(tmp_path):
    p = stats(gen_regular(10, 3))
    payload = json.loads(p.to_json(tmp_path / "p.json"))
    assert set(payload) == {"delta", "beta", "rho", "gamma", "theta", "n", "m"}
    assert payload["n"] == 10 and payload["m"] == 30
    assert abs(payload["theta"] - p.theta) < 1e-15
