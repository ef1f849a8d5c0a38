"""The four pairwise weights and their relations."""

import math

import numpy as np
import pytest

from forestlearn.bayes_measure import DirichletPrior, log_bayes_measure
from forestlearn.dataframe import pair_counts, parse_table
from forestlearn.mi_estimators import (
    EstimatorKind,
    consistent_weight,
    empirical_mi,
    penalized_mi,
    posterior_weight,
    weight_matrix,
)

from conftest import make_table, random_table


def counts_from_cells(cells):
    return pair_counts(make_table(cells), 0, 1)


def test_empirical_mi_perfect_dependence():
    pc = counts_from_cells([[0, 0], [0, 0], [1, 1], [1, 1]])
    assert empirical_mi(pc) == pytest.approx(math.log(2), abs=1e-12)


def test_empirical_mi_exact_factorization():
    pc = counts_from_cells([[0, 0], [0, 1], [1, 0], [1, 1]])
    assert empirical_mi(pc) == 0.0


def test_empirical_mi_requires_joint_rows():
    t = parse_table("a,b\n0,*\n*,1\n", declared_cardinalities=[2, 2])
    with pytest.raises(ValueError):
        empirical_mi(pair_counts(t, 0, 1))


def test_penalized_formula_direct():
    pc = counts_from_cells([[0, 0], [0, 0], [1, 1], [1, 1]])
    assert penalized_mi(pc, 4) == pytest.approx(math.log(2) - math.log(4) / 8, abs=1e-12)


def test_penalized_is_shifted_empirical():
    rng = np.random.default_rng(0)
    t = random_table(rng, 200, (2, 2))
    pc = pair_counts(t, 0, 1)
    assert empirical_mi(pc) - penalized_mi(pc, 200) == pytest.approx(
        math.log(200) / 400, abs=1e-12
    )


def test_posterior_weight_identical_columns_n5():
    # both columns (0,1,0,0,1): joint counts sit on the diagonal
    cells = [[0, 0], [1, 1], [0, 0], [0, 0], [1, 1]]
    pc = counts_from_cells(cells)
    j = posterior_weight(pc, 5)
    prior4 = DirichletPrior.symmetric(4)
    prior2 = DirichletPrior.symmetric(2)
    expected = (
        log_bayes_measure([3, 0, 0, 2], prior4) - 2 * log_bayes_measure([3, 2], prior2)
    ) / 5
    assert j == pytest.approx(expected, abs=1e-12)
    # the marginal measure itself is the known 3/2^8 value
    assert math.exp(log_bayes_measure([3, 2], prior2)) == pytest.approx(3 / 256, abs=1e-15)


def test_posterior_weight_empty_pair_is_zero():
    t = parse_table("a,b\n0,*\n1,*\n", declared_cardinalities=[2, 2])
    pc = pair_counts(t, 0, 1)
    assert posterior_weight(pc, 2) == 0.0
    assert posterior_weight(pc, 2, edge_prior_q=0.3) == 0.0


def test_posterior_equals_scaled_consistent():
    rng = np.random.default_rng(1)
    for _ in range(25):
        t = random_table(rng, 60, (2, 3), missing_rate=0.3)
        pc = pair_counts(t, 0, 1)
        if pc.n_pair == 0:
            continue
        j = posterior_weight(pc, t.n_rows)
        k = consistent_weight(pc)
        assert j == pytest.approx(pc.n_pair / t.n_rows * k, abs=1e-12)


def test_consistent_weight_errors_on_empty_pair():
    t = parse_table("a,b\n0,*\n", declared_cardinalities=[2, 2])
    with pytest.raises(ValueError):
        consistent_weight(pair_counts(t, 0, 1))


def test_consistent_equals_posterior_on_complete_data():
    rng = np.random.default_rng(2)
    t = random_table(rng, 50, (2, 2))
    pc = pair_counts(t, 0, 1)
    assert consistent_weight(pc) == pytest.approx(posterior_weight(pc, 50), abs=1e-12)


def test_independent_pairs_mostly_negative():
    rng = np.random.default_rng(3)
    neg = 0
    for _ in range(200):
        x = (rng.random(200) < 0.5).astype(np.int32)
        y = (rng.random(200) < 0.5).astype(np.int32)
        pc = counts_from_cells(np.stack([x, y], 1))
        neg += consistent_weight(pc) <= 0
    assert neg >= 180


def test_consistent_tracks_true_mi_under_masking():
    # planted dependent pair, half the cells masked in each column
    rng = np.random.default_rng(4)
    n = 10_000
    x = (rng.random(n) < 0.5).astype(np.int32)
    y = x ^ (rng.random(n) < 0.1).astype(np.int32)
    cells = np.stack([x, y], 1).astype(np.int32)
    cells[rng.random(n) < 0.5, 0] = -1
    cells[rng.random(n) < 0.5, 1] = -1
    pc = pair_counts(make_table(cells, (2, 2)), 0, 1)
    true_mi = math.log(2) * (1 - (-0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)))
    assert consistent_weight(pc) == pytest.approx(true_mi, abs=0.05)


def test_consistent_weight_converges_across_seeds():
    # dependent pair at n = 1e5 with heavy masking: the per-observation
    # weight lands within 0.05 nats of the planted value almost always
    true_mi = math.log(2) * (1 - (-0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)))
    hits = 0
    for seed in range(50):
        rng = np.random.default_rng([50, seed])
        n = 100_000
        x = (rng.random(n) < 0.5).astype(np.int32)
        y = x ^ (rng.random(n) < 0.1).astype(np.int32)
        cells = np.stack([x, y], 1).astype(np.int32)
        cells[rng.random(n) < 0.5, 0] = -1
        cells[rng.random(n) < 0.5, 1] = -1
        pc = pair_counts(make_table(cells, (2, 2)), 0, 1)
        hits += abs(consistent_weight(pc) - true_mi) <= 0.05
    assert hits >= 48  # 95% of 50 seeds


def test_estimator_ordering_on_complete_samples():
    rng = np.random.default_rng(5)
    for _ in range(50):
        t = random_table(rng, int(rng.integers(5, 100)), (2, 3))
        pc = pair_counts(t, 0, 1)
        i = empirical_mi(pc)
        assert i >= penalized_mi(pc, t.n_rows)
        assert i >= posterior_weight(pc, t.n_rows)


def test_posterior_penalized_gap_shrinks_like_one_over_n():
    # the two weights agree up to O(1/n) on a dependent pair
    rng = np.random.default_rng(6)
    gaps = {}
    for n in (100, 1000, 10000):
        x = (rng.random(n) < 0.5).astype(np.int32)
        y = x ^ (rng.random(n) < 0.1).astype(np.int32)
        pc = counts_from_cells(np.stack([x, y], 1))
        gaps[n] = abs(penalized_mi(pc, n) - posterior_weight(pc, n)) * n
    scale = gaps[100]
    assert gaps[1000] <= 2.5 * scale
    assert gaps[10000] <= 2.5 * scale


def test_weight_matrix_single_pair(worked_frame):
    w = weight_matrix(worked_frame, EstimatorKind.POSTERIOR)
    pc = pair_counts(worked_frame, 0, 1)
    assert w.matrix[0, 1] == pytest.approx(posterior_weight(pc, 5), abs=1e-15)
    assert w.n_pair_matrix[0, 1] == 2
    assert math.isnan(w.matrix[0, 0])


def test_weight_matrix_matches_per_pair_calls():
    rng = np.random.default_rng(7)
    t = random_table(rng, 40, (2, 3, 2, 4), missing_rate=0.2)
    for kind in EstimatorKind:
        w = weight_matrix(t, kind)
        for i in range(4):
            for j in range(i + 1, 4):
                pc = pair_counts(t, i, j)
                if kind is EstimatorKind.POSTERIOR:
                    expect = posterior_weight(pc, 40)
                elif pc.n_pair == 0:
                    assert math.isnan(w.matrix[i, j])
                    continue
                elif kind is EstimatorKind.EMPIRICAL:
                    expect = empirical_mi(pc)
                elif kind is EstimatorKind.PENALIZED:
                    expect = penalized_mi(pc, 40)
                else:
                    expect = consistent_weight(pc)
                assert w.matrix[i, j] == expect
                assert w.matrix[j, i] == expect


def test_weight_matrix_threads_deterministic():
    rng = np.random.default_rng(8)
    t = random_table(rng, 60, (2, 2, 3, 2, 3), missing_rate=0.15)
    w1 = weight_matrix(t, EstimatorKind.CONSISTENT, threads=1)
    w4 = weight_matrix(t, EstimatorKind.CONSISTENT, threads=4)
    assert np.array_equal(np.nan_to_num(w1.matrix), np.nan_to_num(w4.matrix))


def test_sign_agreement_posterior_consistent():
    rng = np.random.default_rng(9)
    t = random_table(rng, 80, (2, 2, 3), missing_rate=0.3)
    wj = weight_matrix(t, EstimatorKind.POSTERIOR)
    wk = weight_matrix(t, EstimatorKind.CONSISTENT)
    for i in range(3):
        for j in range(i + 1, 3):
            if wj.n_pair_matrix[i, j] > 0:
                assert (wj.matrix[i, j] <= 0) == (wk.matrix[i, j] <= 0)


def test_fig2_simulation_median():
    # 500 dependent binary pairs of length 200: plug-in MI near its
    # known value 0.368 nats
    rng = np.random.default_rng(10)
    values = []
    for _ in range(500):
        x = (rng.random(200) < 0.5).astype(np.int32)
        y = x ^ (rng.random(200) < 0.1).astype(np.int32)
        values.append(empirical_mi(counts_from_cells(np.stack([x, y], 1))))
    assert abs(np.median(values) - 0.368) <= 0.05


def test_cli_token_aliases():
    assert EstimatorKind.from_token("j") is EstimatorKind.POSTERIOR
    assert EstimatorKind.from_token("k") is EstimatorKind.CONSISTENT
    assert EstimatorKind.from_token("empirical") is EstimatorKind.EMPIRICAL
    with pytest.raises(ValueError):
        EstimatorKind.from_token("x")
