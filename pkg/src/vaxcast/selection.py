"""Attribute ranking (information gain, gain ratio, chi-squared, symmetric
uncertainty) and the bottom-up incremental feature-subset evaluation.

Continuous features are discretized into 10 equal-frequency bins for ranking
only; the trees split them natively.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .data_model import BINARY, Dataset
from .errors import EvaluationError, SchemaError

METHODS = ("info_gain", "gain_ratio", "chi_squared", "symmetric_uncertainty")
RANKING_BINS = 10


def entropy(labels) -> float:
    """Shannon entropy of a binary label vector, in bits."""
    y = np.asarray(labels, dtype=np.float64)
    if y.size == 0:
        raise EvaluationError("entropy of an empty vector")
    p = float(y.mean())
    return _h(p)


def _h(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p)))


def equal_frequency_edges(col, bins: int = RANKING_BINS) -> np.ndarray:
    """Inner bin edges at equally spaced quantiles, deduplicated.

    Edges at or below the column minimum cannot split anything and are
    dropped, so a constant column yields no edges.
    """
    qs = np.linspace(0, 1, bins + 1)[1:-1]
    edges = np.unique(np.quantile(col, qs))
    return edges[edges > col.min()]


def _discrete_codes(data: Dataset, name: str):
    col = data.feature_column(name)
    if np.isnan(col).any():
        raise SchemaError(f"missing values in feature {name!r}")
    if data.schema.feature(name).kind == BINARY:
        return col.astype(np.int64), 2
    edges = equal_frequency_edges(col)
    return np.digitize(col, edges), edges.size + 1


def _contingency(codes, V, y):
    table = np.zeros((V, 2))
    table[:, 0] = np.bincount(codes[y == 0], minlength=V)
    table[:, 1] = np.bincount(codes[y == 1], minlength=V)
    return table


def _table_entropies(table):
    """(H(X), H(Y), H(Y|X)) in bits for a V x 2 contingency table."""
    n = table.sum()
    px = table.sum(axis=1) / n
    py = table.sum(axis=0) / n
    hx = float(-(xlogy(px, px)).sum() / np.log(2.0))
    hy = float(-(xlogy(py, py)).sum() / np.log(2.0))
    # H(Y|X) = sum_x p(x) H(Y|X=x)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = table / table.sum(axis=1, keepdims=True)
    cond = np.nan_to_num(cond)
    hyx_terms = -(xlogy(cond, cond)).sum(axis=1) / np.log(2.0)
    hyx = float((px * hyx_terms).sum())
    return hx, hy, hyx


def _chi_squared_stat(table) -> float:
    n = table.sum()
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    expected = rows @ cols / n
    keep = expected > 0
    return float(((table - expected)[keep] ** 2 / expected[keep]).sum())


@dataclass
class FeatureRanking:
    method: str
    scores: dict
    order: list


def rank(data: Dataset, outcome: str | None = None,
         method: str = "info_gain") -> FeatureRanking:
    """Score every feature against the binary outcome and sort descending.

    Ties break by schema order so prefix curves are reproducible.
    """
    if method not in METHODS:
        raise EvaluationError(f"unknown ranking method {method!r}")
    outcome = outcome or data.schema.outcome_name
    y = data.outcome if outcome == data.schema.outcome_name \
        else data.feature_column(outcome)
    if np.isnan(y).any():
        raise SchemaError("missing outcome values; apply restrictions first")
    y = y.astype(np.int64)
    if y.min() == y.max():
        raise EvaluationError("outcome is constant; nothing to rank against")

    names = data.schema.names
    scores = {}
    for name in names:
        codes, V = _discrete_codes(data, name)
        table = _contingency(codes, V, y)
        if method == "chi_squared":
            scores[name] = _chi_squared_stat(table)
            continue
        hx, hy, hyx = _table_entropies(table)
        ig = max(hy - hyx, 0.0)
        if method == "info_gain":
            scores[name] = ig
        elif method == "gain_ratio":
            scores[name] = ig / hx if hx > 0 else 0.0
        else:  # symmetric_uncertainty
            scores[name] = 2.0 * ig / (hx + hy) if hx + hy > 0 else 0.0

    vals = np.array([scores[n] for n in names])
    order_idx = np.argsort(-vals, kind="stable")
    return FeatureRanking(
        method=method,
        scores=scores,
        order=[names[i] for i in order_idx],
    )


@dataclass
class CurvePoint:
    n_features: int
    features: list
    ppv: float | None
    npv: float | None
    acc: float
    auc: float | None


def incremental_eval(train: Dataset, test: Dataset, ranking: FeatureRanking,
                     step_sizes, trainer) -> list[CurvePoint]:
    """Train on growing ranked-feature prefixes and report test metrics.

    `trainer` is either a ForestConfig or the string "naive_bayes". The
    ranking must come from the training split only. Each prefix is handed to
    the trainer in schema order, so the full prefix reproduces a direct
    train/evaluate run with the same seed.
    """
    from . import forest as forest_mod
    from .evaluation import evaluate_predictions

    F = len(train.schema.features)
    curve = []
    for size in step_sizes:
        if size > F:
            raise EvaluationError(f"prefix size {size} exceeds {F} features")
        chosen = ranking.order[:size]
        if trainer == "naive_bayes":
            model = forest_mod.train_naive_bayes(train, features=chosen)
            pred, scores = forest_mod.predict_nb_batch(model, test)
            used = model.feature_names
        else:
            model = forest_mod.train_forest(train, config=trainer,
                                            features=chosen)
            pred, scores = forest_mod.predict_batch(model, test)
            used = model.trained_features
        rep = evaluate_predictions(pred, test.outcome, scores)
        curve.append(CurvePoint(
            n_features=len(used),
            features=list(used),
            ppv=rep.ppv, npv=rep.npv, acc=rep.acc, auc=rep.auc,
        ))
    return curve
