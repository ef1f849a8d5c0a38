"""Planted-model sampling, the hub scenario, and the trial harness."""

import math

import numpy as np
import pytest

from forestlearn.dataframe import MISSING
from forestlearn.mi_estimators import EstimatorKind
from forestlearn.simulator import (
    ForestModel,
    hub_children_agreement,
    masked_hub_model,
    model_marginals,
    model_mutual_information,
    model_pair_joint,
    posterior_inconsistency_threshold,
    run_trials,
    sample_frame,
)

from conftest import seven_vertex_model


def test_sample_frame_empty():
    t = sample_frame(masked_hub_model(0.1, 0.5), 0, seed=0)
    assert t.n_rows == 0 and t.n_cols == 3


def test_sample_frame_no_masking():
    model = seven_vertex_model(missing=0.0, masked_cols=())
    t = sample_frame(model, 500, seed=1)
    assert not np.any(t.cells == MISSING)


def test_sample_frame_reproducible():
    model = masked_hub_model(0.1, 0.4)
    a = sample_frame(model, 200, seed=7)
    b = sample_frame(model, 200, seed=7)
    assert np.array_equal(a.cells, b.cells)
    c = sample_frame(model, 200, seed=8)
    assert not np.array_equal(a.cells, c.cells)


def test_sampled_pair_frequencies_match_model():
    # empirical pair frequencies inside three-sigma binomial bands
    model = seven_vertex_model(missing=0.0, masked_cols=())
    n = 100_000
    t = sample_frame(model, n, seed=2)
    for i, j in [(0, 1), (1, 3), (2, 3), (0, 6)]:
        joint = model_pair_joint(model, i, j)
        for x in range(2):
            for y in range(2):
                count = int(np.sum((t.cells[:, i] == x) & (t.cells[:, j] == y)))
                expect = n * joint[x, y]
                sigma = math.sqrt(n * joint[x, y] * (1 - joint[x, y]))
                assert abs(count - expect) <= 3 * sigma


def test_masking_rates_match():
    model = masked_hub_model(0.1, 0.5)
    t = sample_frame(model, 50_000, seed=3)
    frac = float(np.mean(t.cells[:, 0] == MISSING))
    assert abs(frac - 0.5) < 0.01
    assert not np.any(t.cells[:, 1] == MISSING)


def test_model_marginals_propagate():
    model = seven_vertex_model(flip=0.2, missing=0.0, masked_cols=())
    for m in model_marginals(model):
        assert m == pytest.approx([0.5, 0.5], abs=1e-12)


def test_hub_agreement_probability():
    assert hub_children_agreement(0.1) == pytest.approx(0.82, abs=1e-12)


def test_hub_model_complete_when_rate_zero():
    t = sample_frame(masked_hub_model(0.1, 0.0), 300, seed=4)
    assert not np.any(t.cells == MISSING)


def test_hub_true_mutual_information():
    model = masked_hub_model(0.1, 0.0)
    h2 = -0.1 * math.log2(0.1) - 0.9 * math.log2(0.9)
    expected = math.log(2) * (1 - h2)  # 0.368 nats
    assert model_mutual_information(model, 0, 1) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.368, abs=5e-4)
    # children pair: strictly smaller information through the hub
    child = model_mutual_information(model, 1, 2)
    assert 0 < child < expected


def test_threshold_small_flip_limit():
    assert posterior_inconsistency_threshold(1e-6) < 1e-4


def test_threshold_frozen_value():
    # recomputed by hand from the two binary entropies
    assert posterior_inconsistency_threshold(0.1) == pytest.approx(0.397514, abs=1e-5)


def test_threshold_selection_identity():
    # above-threshold masking is exactly the regime where the surviving
    # hub-edge weight drops below the child-child weight
    for eps in (0.05, 0.1, 0.2, 0.3):
        th = posterior_inconsistency_threshold(eps)
        h = lambda p: 0.0 if p in (0, 1) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)
        agree = hub_children_agreement(eps)
        for delta in (0.1, 0.3, 0.5, 0.7, 0.9):
            lhs = (1 - delta) * (1 - h(eps))
            rhs = 1 - h(agree)
            assert (delta > th) == (lhs < rhs)


def test_run_trials_single_trial_entropy_zero():
    model = masked_hub_model(0.1, 0.2)
    report = run_trials(model, n=2000, trials=1, seed=5)
    for kind in (EstimatorKind.POSTERIOR, EstimatorKind.CONSISTENT):
        assert report.entropy_bits(kind) == 0.0


def test_run_trials_reproducible_and_thread_invariant():
    model = masked_hub_model(0.1, 0.4)
    r1 = run_trials(model, n=1000, trials=6, seed=6)
    r2 = run_trials(model, n=1000, trials=6, seed=6)
    r4 = run_trials(model, n=1000, trials=6, seed=6, threads=3)
    assert r1.forest_counts == r2.forest_counts == r4.forest_counts
    for kind in r1.weight_mean:
        assert np.allclose(r1.weight_mean[kind], r4.weight_mean[kind])


def test_run_trials_entropy_zero_iff_unanimous():
    model = masked_hub_model(0.1, 0.2)
    report = run_trials(model, n=20_000, trials=8, seed=7)
    for kind, counts in report.forest_counts.items():
        if len(counts) == 1:
            assert report.entropy_bits(kind) == 0.0
        else:
            assert report.entropy_bits(kind) > 0.0


def test_hub_crossover_direction():
    # small run of the inconsistency experiment: above the threshold the
    # posterior learner links the children, the consistent one does not
    model_above = masked_hub_model(0.1, 0.6)
    report = run_trials(model_above, n=100_000, trials=10, seed=8)
    true_edges = ((0, 1), (0, 2))
    assert report.true_forest_rate(EstimatorKind.CONSISTENT) >= 0.9
    contains_child_edge = lambda edges: (1, 2) in edges
    assert report.match_rate(EstimatorKind.POSTERIOR, contains_child_edge) >= 0.9
    model_below = masked_hub_model(0.1, 0.2)
    report2 = run_trials(model_below, n=100_000, trials=10, seed=9)
    assert report2.true_forest_rate(EstimatorKind.POSTERIOR) >= 0.9
    assert report2.true_forest_rate(EstimatorKind.CONSISTENT) >= 0.9
    assert report.model_edges == true_edges


def test_crossover_sweep_flips_at_threshold():
    # recovery of the true structure by the posterior learner collapses
    # across the threshold while the consistent learner stays put
    th = posterior_inconsistency_threshold(0.1)
    rates = {}
    for delta in (0.2, 0.3, 0.5, 0.6):
        report = run_trials(masked_hub_model(0.1, delta), n=100_000, trials=8, seed=10)
        rates[delta] = (
            report.true_forest_rate(EstimatorKind.POSTERIOR),
            report.true_forest_rate(EstimatorKind.CONSISTENT),
        )
    for delta, (post_rate, cons_rate) in rates.items():
        assert cons_rate >= 0.9
        if delta < th - 0.05:
            assert post_rate >= 0.9
        elif delta > th + 0.05:
            assert post_rate <= 0.1


def test_complete_seven_vertex_recovery_both_estimators():
    model = seven_vertex_model(flip=0.2, missing=0.0, masked_cols=())
    report = run_trials(model, n=10_000, trials=10, seed=12)
    assert report.true_forest_rate(EstimatorKind.POSTERIOR) >= 0.9
    assert report.true_forest_rate(EstimatorKind.CONSISTENT) >= 0.9


def test_model_validation_errors():
    from forestlearn.forest_learn import Forest

    forest = Forest(n_vertices=2, edges=frozenset({(0, 1)}))
    with pytest.raises(ValueError):
        ForestModel(
            forest=forest,
            root_marginals={0: np.array([0.7, 0.2])},  # not normalized
            edge_conditionals={(0, 1): np.eye(2)},
            missing_rates=np.zeros(2),
        )
    with pytest.raises(ValueError):
        ForestModel(
            forest=forest,
            root_marginals={0: np.array([0.5, 0.5])},
            edge_conditionals={},  # missing conditional
            missing_rates=np.zeros(2),
        )
    with pytest.raises(ValueError):
        masked_hub_model(0.7, 0.1)  # flip probability out of range
