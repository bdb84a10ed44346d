import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chunkcheck.errors import ValidationError
from chunkcheck.metrics import (
    calibration_curve,
    candidate_thresholds,
    ece,
    evaluate_scores,
    f1_macro_optimal,
    kendall_tau,
    macro_f1,
    pearson,
    retrieval_recall,
    roc_auc,
)
from oracles import (
    auc_pair_counting,
    best_macro_f1_by_cuts,
    curve_by_hand,
    ece_by_hand,
    macro_f1_naive,
    pearson_naive,
    tau_b_enumeration,
)

# ---------------------------------------------------------------------------
# roc_auc


def test_roc_auc_worked_example():
    # pair counting by hand: 3 of the 4 positive-negative pairs are ordered
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == pytest.approx(0.75)


def test_roc_auc_perfect_separation():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0


def test_roc_auc_random_labels_near_half():
    rng = random.Random(17)
    n = 10_000
    scores = [rng.random() for _ in range(n)]
    labels = [rng.random() < 0.5 for _ in range(n)]
    assert abs(roc_auc(scores, labels) - 0.5) < 0.02


def test_roc_auc_tie_handling():
    assert roc_auc([0.5, 0.5], [0, 1]) == 0.5
    assert roc_auc([0.5, 0.5, 0.9], [0, 1, 1]) == pytest.approx(0.75)


def test_roc_auc_complement_symmetry():
    rng = random.Random(4)
    scores = [rng.random() for _ in range(40)]
    labels = [rng.random() < 0.4 for _ in range(40)]
    if all(labels) or not any(labels):
        labels[0] = not labels[0]
    flipped = [not y for y in labels]
    assert roc_auc(scores, labels) == pytest.approx(1.0 - roc_auc(scores, flipped))


def test_roc_auc_single_class_rejected():
    with pytest.raises(ValidationError):
        roc_auc([0.1, 0.2], [1, 1])


# ---------------------------------------------------------------------------
# Correlations


def test_correlations_on_identity_and_negation():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, x) == pytest.approx(1.0)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0)
    assert kendall_tau(x, x) == pytest.approx(1.0)
    assert kendall_tau(x, [-v for v in x]) == pytest.approx(-1.0)


def test_kendall_tau_worked_example():
    # one discordant pair out of six: (5 - 1) / 6
    assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(2 * (5 - 1) / (4 * 3))


def test_correlation_input_validation():
    with pytest.raises(ValidationError):
        pearson([1.0, 1.0], [0.0, 1.0])
    with pytest.raises(ValidationError):
        pearson([1.0], [0.0])
    with pytest.raises(ValidationError):
        kendall_tau([2.0, 2.0], [0.0, 1.0])


@given(
    st.lists(st.floats(0, 1, allow_nan=False), min_size=3, max_size=30),
    st.sampled_from([math.sqrt, lambda v: v**3, lambda v: 2 * v + 1, math.exp]),
)
@settings(max_examples=80, deadline=None)
def test_rank_metrics_invariant_under_monotone_transforms(scores, transform):
    labels = [i % 2 == 0 for i in range(len(scores))]
    mapped = [transform(s) for s in scores]
    if len(set(scores)) != len(set(mapped)):
        return  # transform collapsed distinct values through rounding
    assert roc_auc(mapped, labels) == pytest.approx(roc_auc(scores, labels), abs=1e-12)
    if len(set(scores)) > 1 and len(set(labels)) > 1:
        assert kendall_tau(mapped, [float(v) for v in labels]) == pytest.approx(
            kendall_tau(scores, [float(v) for v in labels]), abs=1e-9
        )


@given(
    st.lists(st.integers(-50, 50).map(float), min_size=3, max_size=30),
    st.floats(0.1, 4, allow_nan=False),
    st.floats(-3, 3, allow_nan=False),
)
@settings(max_examples=80, deadline=None)
def test_pearson_invariant_under_positive_affine(x, a, b):
    if len(set(x)) < 2:
        return
    y = [i + (1 if i % 3 == 0 else -1) * 0.5 for i in range(len(x))]
    assert pearson([a * v + b for v in x], y) == pytest.approx(pearson(x, y), abs=1e-9)


# ---------------------------------------------------------------------------
# Optimal-threshold macro F1


def test_f1_macro_optimal_worked_example():
    f1, threshold = f1_macro_optimal([0.2, 0.6, 0.9], [0, 1, 1])
    assert f1 == pytest.approx(1.0)
    assert threshold == pytest.approx(0.4)


def test_f1_macro_optimal_identical_scores():
    scores = [0.5, 0.5, 0.5, 0.5]
    labels = [0, 1, 1, 1]
    f1, _ = f1_macro_optimal(scores, labels)
    assert f1 == pytest.approx(best_macro_f1_by_cuts(scores, labels))


def test_f1_macro_optimal_separable():
    f1, threshold = f1_macro_optimal([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    assert f1 == 1.0
    assert threshold == pytest.approx(0.5)


def test_f1_threshold_is_lowest_attaining_max():
    # anti-correlated scores: predicting all-positive (below-min sentinel) and
    # all-negative (above-max sentinel) tie at macro F1 = 1/3; the lower
    # threshold must win
    scores = [0.2, 0.8]
    labels = [1, 0]
    f1, threshold = f1_macro_optimal(scores, labels)
    assert f1 == pytest.approx(1 / 3)
    assert threshold == pytest.approx(0.2 - 0.5)


def test_candidate_thresholds_cover_all_cuts():
    cands = candidate_thresholds([0.2, 0.6, 0.9])
    assert cands == [pytest.approx(-0.3), pytest.approx(0.4), pytest.approx(0.75),
                     pytest.approx(1.4)]


def test_f1_value_invariant_under_monotone_transform():
    scores = [0.05, 0.3, 0.32, 0.7, 0.71, 0.9]
    labels = [0, 0, 1, 0, 1, 1]
    f1_raw, t_raw = f1_macro_optimal(scores, labels)
    mapped = [math.sqrt(s) for s in scores]
    f1_mapped, t_mapped = f1_macro_optimal(mapped, labels)
    assert f1_raw == pytest.approx(f1_mapped)
    # the chosen thresholds induce the same prediction vector
    assert [s >= t_raw for s in scores] == [m >= t_mapped for m in mapped]


# ---------------------------------------------------------------------------
# Calibration


def test_ece_worked_example():
    report = ece([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0], bins=2)
    assert report.ece == pytest.approx(0.475)
    lo, hi = report.bins
    assert (lo.size, hi.size) == (2, 2)
    assert lo.conf == pytest.approx(0.2)
    assert lo.acc == pytest.approx(1.0)
    assert hi.conf == pytest.approx(0.85)
    assert hi.acc == pytest.approx(1.0)


def test_ece_perfect_confident_classifier():
    report = ece([1.0, 1.0, 1.0], [1, 1, 1], bins=10)
    assert report.ece == 0.0


def test_ece_empty_bins_contribute_zero():
    report = ece([0.05, 0.95], [0, 1], bins=10)
    assert sum(b.size for b in report.bins) == 2
    assert sum(1 for b in report.bins if b.size) == 2
    # bin [0,.1): acc 1 (correct negative), conf .05 -> gap .95, weight 1/2
    # bin [.9,1]: acc 1, conf .95 -> gap .05, weight 1/2
    assert report.ece == pytest.approx(0.95 / 2 + 0.05 / 2)
    assert all(b.acc == 0.0 and b.conf == 0.0 for b in report.bins if b.size == 0)


def test_ece_validates_inputs():
    with pytest.raises(ValidationError):
        ece([1.2], [1], bins=10)
    with pytest.raises(ValidationError):
        ece([0.5], [1], bins=0)


def test_top_bin_right_closed():
    report = ece([1.0], [1], bins=10)
    assert report.bins[-1].size == 1


def test_calibration_curve_basics():
    pts = calibration_curve([0.1, 0.2, 0.8], [0, 0, 0], bins=2)
    assert all(p.frac_positive == 0.0 for p in pts)
    pts = calibration_curve([0.1, 0.9, 0.4], [0, 1, 1], bins=1)
    assert len(pts) == 1
    assert pts[0].mean_prob == pytest.approx((0.1 + 0.9 + 0.4) / 3)
    assert pts[0].frac_positive == pytest.approx(2 / 3)
    assert pts[0].size == 3


def test_calibration_curve_on_calibrated_synthetic_data():
    rng = np.random.default_rng(1234)
    n = 100_000
    probs = rng.uniform(0.0, 1.0, size=n)
    labels = rng.uniform(size=n) < probs
    for point in calibration_curve(probs, labels, bins=10):
        assert abs(point.mean_prob - point.frac_positive) < 0.02


# ---------------------------------------------------------------------------
# Oracle battery: implementations vs naive formulas


def test_metrics_match_naive_oracles_on_random_instances():
    rng = random.Random(99)
    for _ in range(300):
        n = rng.randint(2, 50)
        scores = [round(rng.random(), rng.choice([1, 2, 6])) for _ in range(n)]
        labels = [rng.random() < 0.5 for _ in range(n)]
        if all(labels) or not any(labels):
            labels[0] = not labels[0]
        y = [1.0 if v else 0.0 for v in labels]

        assert roc_auc(scores, labels) == pytest.approx(
            auc_pair_counting(scores, labels), abs=1e-9
        )
        if len(set(scores)) > 1:
            assert pearson(scores, y) == pytest.approx(pearson_naive(scores, y), abs=1e-9)
            assert kendall_tau(scores, y) == pytest.approx(
                tau_b_enumeration(scores, y), abs=1e-9
            )
        f1, threshold = f1_macro_optimal(scores, labels)
        assert f1 == pytest.approx(best_macro_f1_by_cuts(scores, labels), abs=1e-9)
        preds = [s >= threshold for s in scores]
        assert macro_f1(preds, labels) == pytest.approx(f1, abs=1e-9)

        bins = rng.choice([1, 2, 5, 10])
        report = ece(scores, labels, bins=bins)
        assert report.ece == pytest.approx(ece_by_hand(scores, labels, bins), abs=1e-9)
        got_curve = [
            (p.mean_prob, p.frac_positive, p.size)
            for p in calibration_curve(scores, labels, bins=bins)
        ]
        want_curve = curve_by_hand(scores, labels, bins)
        assert len(got_curve) == len(want_curve)
        for got, want in zip(got_curve, want_curve):
            assert got[0] == pytest.approx(want[0], abs=1e-9)
            assert got[1] == pytest.approx(want[1], abs=1e-9)
            assert got[2] == want[2]


def test_macro_f1_against_naive():
    rng = random.Random(31)
    for _ in range(100):
        n = rng.randint(1, 30)
        preds = [rng.random() < 0.5 for _ in range(n)]
        labels = [rng.random() < 0.5 for _ in range(n)]
        assert macro_f1(preds, labels) == pytest.approx(
            macro_f1_naive(preds, labels), abs=1e-12
        )


# ---------------------------------------------------------------------------
# Retrieval recall and report assembly


def test_retrieval_recall_examples():
    assert retrieval_recall([True, True, False, False]) == 0.5
    assert retrieval_recall([True] * 5) == 1.0
    with pytest.raises(ValidationError):
        retrieval_recall([])


def test_retrieval_recall_hand_counted_fixture():
    hits = [True, False, True, True, False, True, True, True, False, True,
            False, True, True, True, False, True, False, True, True, True]
    assert len(hits) == 20
    assert retrieval_recall(hits) == pytest.approx(14 / 20)


def test_evaluate_scores_assembles_report():
    scores = [0.1, 0.4, 0.35, 0.8, 0.9]
    labels = [0, 0, 1, 1, 1]
    report = evaluate_scores(scores, labels, wall_clock_s=1.5, scorer_calls_total=25)
    assert report.n == 5
    assert report.roc_auc == pytest.approx(auc_pair_counting(scores, labels))
    assert 0.0 <= report.f1_macro <= 1.0
    assert -1.0 <= report.kendall_tau <= 1.0
    assert report.wall_clock_s == 1.5
    assert report.scorer_calls_total == 25
