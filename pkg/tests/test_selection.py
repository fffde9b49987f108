import numpy as np
import pytest

import vaxcast as vx
from vaxcast.data_model import FeatureSpec, Record, Schema
from vaxcast.errors import EvaluationError
from vaxcast.selection import METHODS, entropy, equal_frequency_edges

from conftest import simple_config


def xy_dataset(x, y, extra=None):
    """Binary feature(s) + outcome; extra maps name -> column."""
    extra = extra or {}
    names = ["x"] + list(extra)
    feats = tuple([FeatureSpec(n, "binary", "g") for n in names]
                  + [FeatureSpec("age", "continuous", "demographics")])
    schema = Schema(feats)
    rows = []
    for i in range(len(y)):
        values = {"x": x[i]}
        for n in extra:
            values[n] = extra[n][i]
        rows.append(Record(values=values, outcome=int(y[i]), age=40, year=2012))
    return vx.Dataset(schema, rows)


class TestEntropy:
    def test_balanced_is_one_bit(self):
        assert entropy([0, 1, 0, 1]) == 1.0

    def test_constant_is_zero(self):
        assert entropy([1, 1, 1]) == 0.0
        assert entropy([0]) == 0.0

    def test_published_prevalence_value(self):
        # direct evaluation oracle at p = 0.418
        p = 0.418
        oracle = -(p * np.log2(p) + (1 - p) * np.log2(1 - p))
        labels = np.zeros(1000)
        labels[:418] = 1
        assert abs(entropy(labels) - oracle) < 1e-12
        assert abs(oracle - 0.9806) < 5e-4

    def test_empty_rejected(self):
        with pytest.raises(EvaluationError):
            entropy([])


class TestRank:
    def test_perfect_feature_ranks_first_everywhere(self):
        y = np.array([0, 1] * 100)
        noise = (np.arange(200) % 3 == 0).astype(float)
        data = xy_dataset(y.copy(), y, extra={"noise": noise})
        for method in METHODS:
            r = vx.rank(data, method=method)
            assert r.order[0] == "x", method
            if method == "info_gain":
                assert abs(r.scores["x"] - 1.0) < 1e-12

    def test_independent_feature_scores_near_zero(self):
        cfg = simple_config(n=50_000, seed=51, coefs={"x0": 0.8})
        data = vx.generate(cfg)
        r = vx.rank(data, method="info_gain")
        assert r.scores["x3"] < 0.001
        assert r.order.index("x0") == 0

    def test_info_gain_symmetric(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 2, 500).astype(float)
        y = np.clip(x + (rng.random(500) < 0.3), 0, 1).astype(float)
        a = vx.rank(xy_dataset(x, y), outcome="flushot", method="info_gain")
        b = vx.rank(xy_dataset(y, x), outcome="flushot", method="info_gain")
        assert abs(a.scores["x"] - b.scores["x"]) < 1e-12

    def test_symmetric_uncertainty_bounds_and_equality_case(self):
        y = np.array([0, 1] * 150)
        data = xy_dataset(y.copy(), y)
        r = vx.rank(data, method="symmetric_uncertainty")
        assert abs(r.scores["x"] - 1.0) < 1e-12
        cfg = simple_config(n=5000, seed=53, coefs={"x0": 0.5})
        r2 = vx.rank(vx.generate(cfg), method="symmetric_uncertainty")
        for v in r2.scores.values():
            assert 0.0 <= v <= 1.0

    def test_duplicate_feature_leaves_other_scores_alone(self):
        rng = np.random.default_rng(5)
        x = rng.integers(0, 2, 400).astype(float)
        z = rng.integers(0, 2, 400).astype(float)
        y = np.clip(x + (rng.random(400) < 0.25), 0, 1)
        base = xy_dataset(x, y, extra={"z": z})
        dup = xy_dataset(x, y, extra={"z": z, "z2": z})
        for method in METHODS:
            a = vx.rank(base, method=method)
            b = vx.rank(dup, method=method)
            assert abs(a.scores["x"] - b.scores["x"]) < 1e-12
            assert abs(a.scores["z"] - b.scores["z"]) < 1e-12

    def test_chi_squared_null_mean_near_df(self):
        # 100 independent 1-df features: mean statistic should sit near 1
        n = 50_000
        rng = np.random.default_rng(7)
        feats = tuple([FeatureSpec(f"n{i}", "binary", "g") for i in range(100)]
                      + [FeatureSpec("age", "continuous", "demographics")])
        schema = Schema(feats)
        X = np.empty((n, 101))
        X[:, :100] = (rng.random((n, 100)) < 0.5).astype(float)
        X[:, 100] = rng.integers(20, 80, n)
        y = (rng.random(n) < 0.418).astype(float)
        data = vx.Dataset.from_arrays(schema, X, y, np.full(n, 2012))
        r = vx.rank(data, method="chi_squared")
        scores = [r.scores[f"n{i}"] for i in range(100)]
        assert 0.5 <= np.mean(scores) <= 2.0

    def test_ties_break_by_schema_order(self):
        x = np.array([0.0, 1.0] * 50)
        data = xy_dataset(x, x.copy(), extra={"twin": x.copy()})
        r = vx.rank(data, method="info_gain")
        assert r.order[0] == "x" and r.order[1] == "twin"

    def test_constant_outcome_rejected(self):
        data = xy_dataset(np.array([0.0, 1.0] * 5), np.ones(10))
        with pytest.raises(EvaluationError):
            vx.rank(data)

    def test_order_is_permutation(self):
        cfg = simple_config(n=2000, seed=55, coefs={"x0": 0.5})
        data = vx.generate(cfg)
        r = vx.rank(data)
        assert sorted(r.order) == sorted(data.schema.names)


class TestBinning:
    def test_edges_deduplicated(self):
        col = np.array([1.0] * 90 + [2.0] * 10)
        edges = equal_frequency_edges(col)
        assert len(edges) == len(set(edges.tolist()))

    def test_constant_column_no_edges(self):
        assert equal_frequency_edges(np.ones(50)).size == 0


class TestIncrementalEval:
    def test_full_prefix_matches_direct_run(self, small_default_pop):
        data = small_default_pop
        half = len(data) // 2
        train, test = data.subset(range(half)), data.subset(range(half, len(data)))
        ranking = vx.rank(train, method="info_gain")
        fc = vx.ForestConfig(n_trees=5, max_depth=6, seed=99)
        curve = vx.incremental_eval(train, test, ranking, [47], fc)
        model = vx.train_forest(train, config=fc)
        pred, scores = vx.predict_batch(model, test)
        rep = vx.evaluate_predictions(pred, test.outcome, scores)
        assert curve[0].acc == rep.acc
        assert curve[0].ppv == rep.ppv
        assert curve[0].auc == rep.auc

    def test_prefix_too_large_rejected(self, small_default_pop):
        ranking = vx.rank(small_default_pop)
        with pytest.raises(EvaluationError):
            vx.incremental_eval(small_default_pop, small_default_pop,
                                ranking, [48], vx.ForestConfig(seed=1))

    def test_nine_feature_prefix_well_formed(self, small_default_pop):
        data = small_default_pop
        half = len(data) // 2
        train, test = data.subset(range(half)), data.subset(range(half, len(data)))
        ranking = vx.rank(train, method="symmetric_uncertainty")
        fc = vx.ForestConfig(n_trees=5, max_depth=6, seed=7)
        curve = vx.incremental_eval(train, test, ranking, [9], fc)
        point = curve[0]
        assert point.n_features == 9
        assert set(point.features) <= set(train.schema.names)
        assert 0.0 <= point.acc <= 1.0
        assert point.auc is not None

    def test_naive_bayes_trainer(self, small_default_pop):
        data = small_default_pop
        half = len(data) // 2
        train, test = data.subset(range(half)), data.subset(range(half, len(data)))
        ranking = vx.rank(train)
        curve = vx.incremental_eval(train, test, ranking, [6, 12],
                                    "naive_bayes")
        assert len(curve) == 2
        assert curve[0].n_features == 6
        assert 0.4 <= curve[1].acc <= 1.0
