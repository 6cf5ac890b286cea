"""ROC analysis, AUC, Youden-point selection and threshold statistics.

Conventions: a row is predicted positive iff its score is >= the threshold,
and reported thresholds sit at midpoints between adjacent distinct scores
(with sentinels above the max and below the min), so operating points are
stable under score jitter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    sensitivity: float
    specificity: float


@dataclass(frozen=True)
class RocCurve:
    points: tuple[RocPoint, ...]  # thresholds strictly descending


@dataclass(frozen=True)
class MetricsSummary:
    auc: float
    sensitivity: float
    specificity: float
    accuracy: float
    kappa: float
    threshold: float

    STATS = ("auc", "sensitivity", "specificity", "accuracy", "kappa")


def _check(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DataError("scores and labels must be equal-length vectors")
    if not np.isfinite(scores).all():
        raise DataError("scores must be finite")
    if labels.min() == labels.max():
        raise DataError("both classes must be present")
    return scores, labels


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: (concordant + 0.5 * tied pairs) / (P * N),
    computed via midranks in O(n log n); exact under ties."""
    scores, labels = _check(scores, labels)
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    ranks = np.empty(len(s))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        ranks[i : j + 1] = (i + j) / 2 + 1  # midrank, 1-based
        i = j + 1
    pos = labels[order] == 1
    n_pos = int(pos.sum())
    n_neg = len(s) - n_pos
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def roc_curve(scores, labels) -> RocCurve:
    """All realized operating points under the score >= threshold rule."""
    scores, labels = _check(scores, labels)
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    distinct = []
    tp_cum = []
    fp_cum = []
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        tp += int((y[i : j + 1] == 1).sum())
        fp += (j - i + 1) - int((y[i : j + 1] == 1).sum())
        distinct.append(s[i])
        tp_cum.append(tp)
        fp_cum.append(fp)
        i = j + 1

    points = [RocPoint(distinct[0] + 1.0, 0.0, 1.0)]
    for k in range(len(distinct)):
        thr = (
            (distinct[k] + distinct[k + 1]) / 2
            if k + 1 < len(distinct)
            else distinct[-1] - 1.0
        )
        points.append(
            RocPoint(thr, tp_cum[k] / n_pos, (n_neg - fp_cum[k]) / n_neg)
        )
    return RocCurve(tuple(points))


def youden_point(curve: RocCurve) -> RocPoint:
    """Operating point maximizing J = sensitivity + specificity - 1.

    Ties break to higher sensitivity, then to the lower threshold.
    """
    best = None
    for pt in curve.points:
        j = pt.sensitivity + pt.specificity - 1.0
        key = (j, pt.sensitivity, -pt.threshold)
        if best is None or key > best[0]:
            best = (key, pt)
    return best[1]


def confusion(scores, labels, threshold: float):
    """(TP, FN, TN, FP) under the score >= threshold rule."""
    scores, labels = _check(scores, labels)
    pred = scores >= threshold
    tp = int((pred & (labels == 1)).sum())
    fn = int((~pred & (labels == 1)).sum())
    tn = int((~pred & (labels == 0)).sum())
    fp = int((pred & (labels == 0)).sum())
    return tp, fn, tn, fp


def kappa_from_confusion(tp: int, fn: int, tn: int, fp: int) -> float:
    """Two-class Cohen's kappa; defined as 0 when expected agreement is 1."""
    n = tp + fn + tn + fp
    p_o = (tp + tn) / n
    p_e = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n)
    if p_e == 1.0:
        return 0.0
    return (p_o - p_e) / (1.0 - p_e)


def metrics_at_threshold(scores, labels, threshold: float) -> MetricsSummary:
    tp, fn, tn, fp = confusion(scores, labels, threshold)
    return MetricsSummary(
        auc=auc(scores, labels),
        sensitivity=tp / (tp + fn),
        specificity=tn / (tn + fp),
        accuracy=(tp + tn) / (tp + fn + tn + fp),
        kappa=kappa_from_confusion(tp, fn, tn, fp),
        threshold=threshold,
    )


def youden_summary(scores, labels) -> MetricsSummary:
    """Convenience: full summary at the Youden point of the ROC curve."""
    pt = youden_point(roc_curve(scores, labels))
    return metrics_at_threshold(scores, labels, pt.threshold)


def roc_points_rows(curve: RocCurve):
    """Rows for roc_points.csv: (threshold, sensitivity, specificity)."""
    return [(p.threshold, p.sensitivity, p.specificity) for p in curve.points]
