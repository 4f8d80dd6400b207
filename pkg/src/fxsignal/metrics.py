"""Classification metrics: AUC (midrank Mann-Whitney), accuracy, recall,
confusion counts, and lift curves."""

from __future__ import annotations

import numpy as np

from .errors import UndefinedMetricError


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise UndefinedMetricError("scores and labels must be 1-d and aligned")
    if len(s) == 0:
        raise UndefinedMetricError("empty inputs")
    return s, y


def auc(scores, labels) -> float:
    """Probability a random positive outranks a random negative; ties count 1/2."""
    s, y = _check(scores, labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC requires both classes")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s))
    sorted_s = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        ranks[order[i: j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def confusion(scores, labels, threshold: float = 0.5) -> tuple[int, int, int, int]:
    """(TP, FP, TN, FN) with positive prediction at score >= threshold."""
    s, y = _check(scores, labels)
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    tn = int(np.sum(~pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    return tp, fp, tn, fn


def accuracy(scores, labels, threshold: float = 0.5) -> float:
    tp, fp, tn, fn = confusion(scores, labels, threshold)
    return (tp + tn) / (tp + fp + tn + fn)


def recall(scores, labels, threshold: float = 0.5) -> float:
    tp, _, _, fn = confusion(scores, labels, threshold)
    if tp + fn == 0:
        raise UndefinedMetricError("recall undefined without positives")
    return tp / (tp + fn)


def lift_curve(scores, labels, deciles: int = 10) -> np.ndarray:
    """Per score-sorted decile: positive rate divided by the overall positive rate.

    Deciles are equal-count (remainder spread over the leading groups); ties
    keep stable sort order.
    """
    s, y = _check(scores, labels)
    if len(s) < deciles:
        raise UndefinedMetricError(f"need at least {deciles} samples")
    base_rate = float(np.mean(y == 1))
    if base_rate == 0:
        raise UndefinedMetricError("lift undefined with zero positives")
    order = np.argsort(-s, kind="stable")
    groups = np.array_split(y[order], deciles)
    return np.array([float(np.mean(g == 1)) / base_rate for g in groups])
