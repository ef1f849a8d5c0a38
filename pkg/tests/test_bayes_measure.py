"""Sequence-measure values, predictive factorization, normalization."""

import math
from itertools import product

import numpy as np
import pytest

from forestlearn.bayes_measure import DirichletPrior, log_bayes_measure, predictive_probability

KT2 = DirichletPrior.symmetric(2)


def test_binary_half_prior_n5_table():
    # exact values for five binary observations under the half prior
    for c, expect in [(0, 63 / 256), (5, 63 / 256), (1, 7 / 256), (4, 7 / 256), (2, 3 / 256), (3, 3 / 256)]:
        got = log_bayes_measure([5 - c, c], KT2)
        assert abs(got - math.log(expect)) <= 1e-12


def test_empty_counts_measure_one():
    assert log_bayes_measure([0, 0], KT2) == 0.0
    assert log_bayes_measure([0, 0, 0], DirichletPrior.symmetric(3)) == 0.0


def test_predictive_uniform_at_start():
    assert predictive_probability([0, 0], 0, KT2) == 0.5
    assert predictive_probability([0, 0], 1, KT2) == 0.5


def test_predictive_direct_substitution():
    assert predictive_probability([3, 1], 0, KT2) == pytest.approx(3.5 / 5)
    assert predictive_probability([3, 1], 1, KT2) == pytest.approx(1.5 / 5)


def test_predictive_sums_to_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        k = rng.integers(2, 6)
        prior = DirichletPrior(rng.random(k) + 0.1)
        counts = rng.integers(0, 20, size=k)
        total = sum(predictive_probability(counts, s, prior) for s in range(k))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_sequential_product_equals_measure_by_hand():
    # counts (3, 2): multiply predictives along 1,1,1,0,0 by hand
    seq = [1, 1, 1, 0, 0]
    counts = [0, 0]
    prod = 1.0
    for s in seq:
        prod *= predictive_probability(counts, s, KT2)
        counts[s] += 1
    assert math.log(prod) == pytest.approx(log_bayes_measure([2, 3], KT2), abs=1e-12)


def test_predictive_product_matches_closed_form():
    rng = np.random.default_rng(1)
    for _ in range(60):
        k = int(rng.integers(2, 6))
        prior = DirichletPrior.symmetric(k)
        n = int(rng.integers(1, 1000))
        seq = rng.integers(0, k, size=n)
        counts = np.zeros(k)
        log_prod = 0.0
        for s in seq:
            log_prod += math.log(predictive_probability(counts, int(s), prior))
            counts[s] += 1
        assert abs(log_prod - log_bayes_measure(counts, prior)) <= 1e-9


def test_exchangeability_under_permutation():
    rng = np.random.default_rng(2)
    k = 3
    prior = DirichletPrior.symmetric(k)
    seq = rng.integers(0, k, size=30)
    logs = []
    for _ in range(5):
        perm = rng.permutation(seq)
        counts = np.zeros(k)
        log_prod = 0.0
        for s in perm:
            log_prod += math.log(predictive_probability(counts, int(s), prior))
            counts[s] += 1
        logs.append(log_prod)
    assert max(logs) - min(logs) <= 1e-9


@pytest.mark.parametrize("alpha,n", [(2, 6), (3, 5), (3, 6), (2, 1)])
def test_normalization_exhaustive(alpha, n):
    prior = DirichletPrior.symmetric(alpha)
    total = 0.0
    for seq in product(range(alpha), repeat=n):
        counts = np.bincount(seq, minlength=alpha)
        total += math.exp(log_bayes_measure(counts, prior))
    assert total == pytest.approx(1.0, abs=1e-9)


def test_measure_strictly_decreases_with_observations():
    prior = DirichletPrior.symmetric(3)
    counts = np.zeros(3)
    prev = log_bayes_measure(counts, prior)
    rng = np.random.default_rng(3)
    for _ in range(50):
        counts[rng.integers(0, 3)] += 1
        cur = log_bayes_measure(counts, prior)
        assert cur < prev
        prev = cur


def test_errors():
    with pytest.raises(ValueError):
        log_bayes_measure([1, 2, 3], KT2)  # mismatched alphabet
    with pytest.raises(ValueError):
        DirichletPrior(np.array([0.5, 0.0]))  # nonpositive pseudo-count
    with pytest.raises(ValueError):
        predictive_probability([1, 1], 2, KT2)  # symbol out of range
