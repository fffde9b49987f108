import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import vaxcast as vx
from vaxcast.errors import EvaluationError
from vaxcast.evaluation import ConfusionMatrix, auc_from_scores, roc_points


def pair_counting_auc(scores, truth):
    """O(P*N) oracle: proportion of correctly ordered pairs, ties half."""
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth).astype(bool)
    pos = scores[truth]
    neg = scores[~truth]
    wins = 0.0
    for p in pos:
        wins += np.sum(p > neg) + 0.5 * np.sum(p == neg)
    return wins / (len(pos) * len(neg))


class TestConfusion:
    def test_all_correct_positives(self):
        m = vx.confusion([1] * 10, [1] * 10)
        assert (m.tp, m.fp, m.tn, m.fn) == (10, 0, 0, 0)

    def test_complement_predictions(self):
        truth = [0, 1, 0, 1]
        pred = [1, 0, 1, 0]
        m = vx.confusion(pred, truth)
        assert m.tp == 0 and m.tn == 0
        assert m.fp == 2 and m.fn == 2

    def test_random_vectors_match_tally_oracle(self):
        rng = np.random.default_rng(11)
        pred = rng.integers(0, 2, 1000)
        truth = rng.integers(0, 2, 1000)
        m = vx.confusion(pred, truth)
        tally = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
        for p, t in zip(pred, truth):
            key = ("t" if p == t else "f") + ("p" if p == 1 else "n")
            tally[key] += 1
        assert (m.tp, m.fp, m.tn, m.fn) == (tally["tp"], tally["fp"],
                                            tally["tn"], tally["fn"])

    def test_length_mismatch(self):
        with pytest.raises(EvaluationError):
            vx.confusion([1, 0], [1])

    def test_empty(self):
        with pytest.raises(EvaluationError):
            vx.confusion([], [])


class TestMetrics:
    def test_metric_definitions_hand_example(self):
        rep = vx.metrics(ConfusionMatrix(tp=9, fp=1, tn=8, fn=2))
        assert rep.ppv == 0.9
        assert rep.npv == 0.8
        assert rep.acc == 0.85
        assert rep.n == 20

    def test_undefined_ppv_is_flagged_not_zero(self):
        rep = vx.metrics(ConfusionMatrix(tp=0, fp=0, tn=5, fn=5))
        assert rep.ppv is None
        assert rep.npv == 0.5

    def test_undefined_npv(self):
        rep = vx.metrics(ConfusionMatrix(tp=5, fp=5, tn=0, fn=0))
        assert rep.npv is None

    def test_empty_matrix_rejected(self):
        with pytest.raises(EvaluationError):
            vx.metrics(ConfusionMatrix())

    def test_perfect_and_reversed_auc(self):
        truth = [0, 0, 1, 1]
        assert auc_from_scores([0.1, 0.2, 0.8, 0.9], truth) == 1.0
        assert auc_from_scores([0.9, 0.8, 0.2, 0.1], truth) == 0.0

    def test_auc_matches_pair_counting_oracle(self):
        rng = np.random.default_rng(13)
        scores = rng.choice(np.linspace(0, 1, 21), size=500)  # forces ties
        truth = rng.integers(0, 2, 500)
        got = auc_from_scores(scores, truth)
        assert abs(got - pair_counting_auc(scores, truth)) < 1e-12

    def test_auc_single_class_undefined(self):
        assert auc_from_scores([0.1, 0.9], [1, 1]) is None

    def test_scores_without_truth_rejected(self):
        with pytest.raises(EvaluationError):
            vx.metrics(ConfusionMatrix(tp=1, fp=1, tn=1, fn=1), scores=[1.0])


class TestInvariants:
    @settings(max_examples=80, deadline=None)
    @given(st.tuples(st.integers(0, 40), st.integers(0, 40),
                     st.integers(0, 40), st.integers(0, 40)))
    def test_metrics_in_unit_interval(self, counts):
        tp, fp, tn, fn = counts
        if tp + fp + tn + fn == 0:
            return
        rep = vx.metrics(ConfusionMatrix(tp, fp, tn, fn))
        for v in (rep.ppv, rep.npv, rep.acc):
            if v is not None:
                assert 0.0 <= v <= 1.0

    @settings(max_examples=80, deadline=None)
    @given(st.tuples(st.integers(0, 40), st.integers(0, 40),
                     st.integers(0, 40), st.integers(0, 40)))
    def test_acc_invariant_under_class_swap(self, counts):
        tp, fp, tn, fn = counts
        if tp + fp + tn + fn == 0:
            return
        a = vx.metrics(ConfusionMatrix(tp, fp, tn, fn))
        b = vx.metrics(ConfusionMatrix(tn, fn, tp, fp))
        assert a.acc == b.acc

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(0, 64), min_size=4, max_size=60), st.randoms())
    def test_auc_invariant_under_monotone_transform(self, grid, rnd):
        # affine map on a coarse grid: exactly monotone, keeps ties as ties
        scores = [g / 64.0 for g in grid]
        truth = [rnd.randint(0, 1) for _ in scores]
        if len(set(truth)) < 2:
            return
        base = auc_from_scores(scores, truth)
        shifted = auc_from_scores([2.0 * s + 7.0 for s in scores], truth)
        assert abs(base - shifted) < 1e-12


class TestRocPoints:
    def test_endpoints(self):
        scores = [0.1, 0.4, 0.6, 0.9]
        truth = [0, 0, 1, 1]
        rows = roc_points(scores, truth)
        thresholds = [r[0] for r in rows]
        assert thresholds == sorted(thresholds, reverse=True)
        assert rows[-1][1] == 1.0 and rows[-1][2] == 1.0  # lowest threshold

    def test_single_class_rejected(self):
        with pytest.raises(EvaluationError):
            roc_points([0.5, 0.7], [1, 1])
