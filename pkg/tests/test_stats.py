import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from robusteval.errors import DegenerateInputError, OutOfDomainError
from robusteval.stats import (ContrastCounts, PairedScores, compare_correlations,
                              fisher_macro_average, fisher_z, kendall_tau_b, kendall_tau_like,
                              macro_average, pearson, spearman, williams_test)

import oracles

vectors = st.lists(st.integers(-5, 5), min_size=3, max_size=12)


def test_pearson_examples():
    assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    expected = oracles.pearson([1, 2, 4], [1, 3, 5])
    assert pearson(PairedScores([1, 2, 4], [1, 3, 5])) == pytest.approx(expected, abs=1e-14)
    assert expected == pytest.approx(0.9819805060619657, abs=1e-14)


def test_pearson_degenerate():
    with pytest.raises(DegenerateInputError):
        pearson([1, 1, 1], [1, 2, 3])


def test_paired_scores_contract():
    with pytest.raises(ValueError):
        PairedScores([1, 2], [1])
    with pytest.raises(DegenerateInputError):
        PairedScores([1], [1])


def test_spearman_examples():
    assert spearman([1, 2, 3], [1, 4, 9]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [9, 4, 1]) == pytest.approx(-1.0)
    x, y = [1, 2, 2, 4, 5], [2, 1, 3, 5, 4]
    expected = oracles.pearson(oracles.average_ranks(x), oracles.average_ranks(y))
    assert spearman(x, y) == pytest.approx(expected, abs=1e-12)
    with pytest.raises(DegenerateInputError):
        spearman([2, 2, 2], [1, 2, 3])


def test_kendall_examples():
    assert kendall_tau_b([1, 2, 3, 4], [1, 2, 3, 4]) == pytest.approx(1.0)
    assert kendall_tau_b([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)
    with pytest.raises(DegenerateInputError):
        kendall_tau_b([1, 1, 1], [2, 2, 2])


def test_kendall_random_against_enumeration():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x = rng.integers(0, 5, 10).tolist()
        y = rng.integers(0, 5, 10).tolist()
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        assert kendall_tau_b(x, y) == pytest.approx(oracles.kendall_tau_b(x, y), abs=1e-12)


@given(vectors, vectors)
def test_correlations_bounded(x, y):
    n = min(len(x), len(y))
    x, y = x[:n], y[:n]
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    for f in (pearson, spearman, kendall_tau_b):
        assert -1.0 <= f(x, y) <= 1.0


def test_tau_like_examples():
    assert kendall_tau_like(ContrastCounts(8, 2, 0)) == pytest.approx(0.6)
    assert kendall_tau_like(ContrastCounts(7, 7, 3)) == 0.0
    assert kendall_tau_like(ContrastCounts(5, 0, 0)) == 1.0
    with pytest.raises(DegenerateInputError):
        kendall_tau_like(ContrastCounts(0, 0, 4))
    with pytest.raises(ValueError):
        ContrastCounts(-1, 0, 0)


def test_tau_like_equals_tau_b_without_ties():
    # Pairwise contrasts from a tie-free ordering: every pair (i, j) with
    # gold[i] > gold[j] is a "good vs bad" item scored by the metric.
    rng = random.Random(2)
    for _ in range(30):
        n = rng.randint(3, 9)
        gold = rng.sample(range(100), n)
        metric = rng.sample(range(100), n)
        conc = disc = 0
        for i in range(n):
            for j in range(n):
                if gold[i] > gold[j]:
                    if metric[i] > metric[j]:
                        conc += 1
                    else:
                        disc += 1
        assert kendall_tau_like(ContrastCounts(conc, disc)) == pytest.approx(
            kendall_tau_b(metric, gold), abs=1e-12)


def test_fisher_z():
    assert fisher_z(0.0) == 0.0
    assert fisher_z(-0.3) == -fisher_z(0.3)
    assert fisher_z(0.5) == pytest.approx(0.549306, abs=1e-6)
    assert fisher_z(0.5) == pytest.approx(oracles.fisher_z(0.5), abs=1e-15)
    for bad in (1.0, -1.0, 1.5):
        with pytest.raises(OutOfDomainError):
            fisher_z(bad)


@given(st.floats(-0.999, 0.999), st.floats(-0.999, 0.999))
def test_fisher_z_increasing_and_odd(a, b):
    assume(a < b)
    assert fisher_z(a) < fisher_z(b)
    assert fisher_z(-a) == pytest.approx(-fisher_z(a))


def test_williams_null_and_antisymmetry():
    t, p = williams_test(0.6, 0.6, 0.3, 50)
    assert t == 0.0 and p == 1.0
    t1, p1 = williams_test(0.9, 0.8, 0.7, 100)
    t2, p2 = williams_test(0.8, 0.9, 0.7, 100)
    assert t1 == pytest.approx(-t2) and p1 == pytest.approx(p2)


def test_williams_against_textbook_oracle():
    for args in [(0.9, 0.8, 0.7, 100), (0.5, 0.2, 0.1, 30), (-0.3, 0.4, 0.2, 12)]:
        t, p = williams_test(*args)
        ot, op = oracles.williams(*args)
        assert t == pytest.approx(ot, abs=1e-9)
        assert p == pytest.approx(op, abs=1e-9)


def test_williams_p_monotone_in_t():
    prev_t, prev_p = 0.0, 1.0
    for r12 in np.linspace(0.5, 0.9, 9):
        t, p = williams_test(float(r12), 0.5, 0.4, 40)
        assert abs(t) >= prev_t and p <= prev_p
        prev_t, prev_p = abs(t), p


def test_williams_domain():
    with pytest.raises(OutOfDomainError):
        williams_test(1.0, 0.5, 0.5, 10)
    with pytest.raises(OutOfDomainError):
        williams_test(0.5, 0.5, 0.5, 3)


def test_macro_average_and_fisher_combination():
    assert macro_average([0.1, 0.2, 0.3]) == pytest.approx(0.2)
    rs = [0.2, 0.5, 0.8]
    direct = fisher_macro_average(rs, "average_then_transform")
    via_z = fisher_macro_average(rs, "transform_then_average")
    assert direct == pytest.approx(0.5)
    assert via_z == pytest.approx(math.tanh(sum(oracles.fisher_z(r) for r in rs) / 3))
    with pytest.raises(ValueError):
        fisher_macro_average(rs, "other")


def test_compare_correlations():
    rng = np.random.default_rng(0)
    gold = rng.normal(size=200)
    good = gold + 0.3 * rng.normal(size=200)
    bad = gold + 2.0 * rng.normal(size=200)
    res = compare_correlations(good, bad, gold)
    assert res["t"] > 0 and res["significant"]
