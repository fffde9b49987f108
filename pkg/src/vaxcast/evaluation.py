"""Confusion-matrix metrics and ROC AUC.

Positive = recently vaccinated. PPV/NPV come out as None (not 0) when their
denominator is empty, because a silent default would corrupt the split
boundary search. AUC uses the rank statistic with ties counting one half.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .errors import EvaluationError


@dataclass
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class MetricsReport:
    ppv: Optional[float]
    npv: Optional[float]
    acc: float
    auc: Optional[float]
    matrix: ConfusionMatrix
    n: int


def confusion(predictions, truth) -> ConfusionMatrix:
    pred = np.asarray(predictions)
    y = np.asarray(truth)
    if pred.shape != y.shape:
        raise EvaluationError(
            f"length mismatch: {pred.shape} predictions vs {y.shape} truth"
        )
    if pred.size == 0:
        raise EvaluationError("empty prediction vector")
    pred = pred.astype(bool)
    y = y.astype(bool)
    return ConfusionMatrix(
        tp=int((pred & y).sum()),
        fp=int((pred & ~y).sum()),
        tn=int((~pred & ~y).sum()),
        fn=int((~pred & y).sum()),
    )


def auc_from_scores(scores, truth) -> Optional[float]:
    """Mann-Whitney rank AUC; ties contribute one half. None if one-class."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(truth).astype(bool)
    if scores.shape != y.shape:
        raise EvaluationError("scores and truth lengths differ")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(scores)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def metrics(matrix: ConfusionMatrix, scores=None, truth=None) -> MetricsReport:
    """PPV, NPV, accuracy (exact count ratios), plus AUC when scores given."""
    n = matrix.total
    if n <= 0:
        raise EvaluationError("empty confusion matrix")
    ppv = matrix.tp / (matrix.tp + matrix.fp) if matrix.tp + matrix.fp else None
    npv = matrix.tn / (matrix.tn + matrix.fn) if matrix.tn + matrix.fn else None
    acc = (matrix.tp + matrix.tn) / n
    auc = None
    if scores is not None:
        if truth is None:
            raise EvaluationError("AUC needs the truth vector alongside scores")
        auc = auc_from_scores(scores, truth)
    return MetricsReport(ppv=ppv, npv=npv, acc=acc, auc=auc, matrix=matrix, n=n)


def evaluate_predictions(pred, truth, scores=None) -> MetricsReport:
    return metrics(confusion(pred, truth), scores=scores, truth=truth)


def roc_points(scores, truth):
    """(threshold, tpr, fpr) rows over the distinct score values, descending."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(truth).astype(bool)
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise EvaluationError("ROC needs both classes present")
    rows = []
    for thr in np.unique(scores)[::-1]:
        pred = scores >= thr
        tpr = float((pred & y).sum() / n_pos)
        fpr = float((pred & ~y).sum() / n_neg)
        rows.append((float(thr), tpr, fpr))
    return rows
