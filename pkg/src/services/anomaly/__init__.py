"""
Anomaly Detection
=================

One-class splits, reconstruction-error scoring, ROC curves and AUC.

Usage:
    from src.services.anomaly import ScoredSet, auc, roc_curve

    s = ScoredSet(scores=[0.1, 0.4, 0.35, 0.8], labels=[0, 0, 1, 1])
    auc(s)  # 0.75
"""

from .anomaly_models import (
    AnomalyError,
    SingleClassLabelsError,
    ClassNotFoundError,
    ScoredSet,
    OneClassSplit,
)
from .anomaly_helpers import roc_curve, auc, midranks
from .anomaly_service import build_one_class_split, anomaly_score, eval_anomaly

__all__ = [
    "AnomalyError",
    "SingleClassLabelsError",
    "ClassNotFoundError",
    "ScoredSet",
    "OneClassSplit",
    "roc_curve",
    "auc",
    "midranks",
    "build_one_class_split",
    "anomaly_score",
    "eval_anomaly",
]
