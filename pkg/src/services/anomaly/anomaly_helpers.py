"""
ROC and AUC
===========

Threshold sweep and rank-based area computation for scored sets. A sample is
predicted anomalous when its score is at or above the threshold.
"""

from typing import List, Tuple

import numpy as np

from .anomaly_models import ScoredSet, SingleClassLabelsError


def _require_both_classes(s: ScoredSet) -> None:
    if s.n_anomalies == 0 or s.n_normal == 0:
        raise SingleClassLabelsError(
            f"Need both normal and anomalous samples, got {s.n_normal} normal "
            f"and {s.n_anomalies} anomalous"
        )


def roc_curve(s: ScoredSet) -> List[Tuple[float, float]]:
    """
    ROC points (FPR, TPR) for thresholds +inf, every distinct score in
    decreasing order, and -inf.

    Consecutive duplicate points are dropped, so the curve runs from (0, 0) to
    (1, 1) with both coordinates nondecreasing.

    Example:
        >>> roc_curve(ScoredSet(scores=[1, 2, 3, 4], labels=[0, 0, 1, 1]))
        [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
    """
    _require_both_classes(s)
    order = np.argsort(-s.scores, kind="stable")
    scores = s.scores[order]
    labels = s.labels[order]

    # last position of every run of equal scores
    group_ends = np.flatnonzero(np.r_[scores[1:] != scores[:-1], True])
    tps = np.cumsum(labels)[group_ends]
    fps = np.cumsum(1 - labels)[group_ends]

    points = [(0.0, 0.0)]
    for fp, tp in zip(fps, tps):
        point = (fp / s.n_normal, tp / s.n_anomalies)
        if point != points[-1]:
            points.append((float(point[0]), float(point[1])))
    return points


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing the average of their ranks."""
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    return ((starts + ends + 1) / 2.0)[inverse.reshape(-1)]


def auc(s: ScoredSet) -> float:
    """
    Area under the ROC curve, computed as the Mann–Whitney statistic
    P(anomaly score > normal score) + P(tie) / 2.

    Example:
        >>> auc(ScoredSet(scores=[0.1, 0.2, 0.9], labels=[0, 0, 1]))
        1.0
    """
    _require_both_classes(s)
    ranks = midranks(s.scores)
    n_pos, n_neg = s.n_anomalies, s.n_normal
    u = ranks[s.labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
