"""
Anomaly Detection Models
========================

One-class dataset splits, scored test sets and the anomaly exception
hierarchy.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.services.data_io import Dataset


# =============================================================================
# Exceptions
# =============================================================================


class AnomalyError(Exception):
    """Base exception for the one-class anomaly detection pipeline."""

    pass


class SingleClassLabelsError(AnomalyError):
    """Raised when ROC/AUC is requested for labels holding only one class."""

    pass


class ClassNotFoundError(AnomalyError):
    """Raised when the requested normal class does not occur in the data."""

    pass


# =============================================================================
# Models
# =============================================================================


def _binary_labels(v) -> np.ndarray:
    arr = np.array(v, dtype=np.int64)
    if arr.ndim != 1 or not np.all((arr == 0) | (arr == 1)):
        raise ValueError("labels must be a vector of 0 (normal) and 1 (anomaly)")
    arr.setflags(write=False)
    return arr


class ScoredSet(BaseModel):
    """
    Anomaly scores with binary ground truth.

    Attributes:
        scores: Higher means more anomalous
        labels: 0 for normal, 1 for anomaly
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scores: np.ndarray
    labels: np.ndarray

    @field_validator("scores", mode="before")
    @classmethod
    def coerce_scores(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"scores must be a vector, got shape {arr.shape}")
        if np.any(np.isnan(arr)):
            raise ValueError("scores must not contain NaN")
        arr.setflags(write=False)
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def coerce_labels(cls, v):
        return _binary_labels(v)

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.scores) != len(self.labels):
            raise ValueError(f"{len(self.scores)} scores for {len(self.labels)} labels")
        return self

    @property
    def n_anomalies(self) -> int:
        return int(self.labels.sum())

    @property
    def n_normal(self) -> int:
        return int(len(self.labels) - self.labels.sum())


class OneClassSplit(BaseModel):
    """
    Training data of one normal class plus a class-balanced labeled test set.

    Attributes:
        normal_class: Original label of the normal class
        train: Normal samples for training (binary labels, all 0)
        val: Normal samples held out for validation (binary labels, all 0)
        test: Samples of every class with binary labels (normal 0, anomaly 1)
        test_classes: Original class label of every test sample
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    normal_class: int
    train: Dataset
    val: Dataset
    test: Dataset
    test_classes: np.ndarray = Field(..., description="Original labels of the test samples")

    @field_validator("test_classes", mode="before")
    @classmethod
    def coerce_classes(cls, v):
        arr = np.array(v, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_labels(self):
        for part in (self.train, self.val):
            if part.labels is not None and np.any(part.labels != 0):
                raise ValueError("train and val must hold normal samples only")
        labels = self.test.labels
        if labels is None or not (np.any(labels == 0) and np.any(labels == 1)):
            raise ValueError("test must hold both normal and anomalous samples")
        if len(self.test_classes) != len(self.test):
            raise ValueError("test_classes must have one entry per test sample")
        return self

    @property
    def anomaly_rate(self) -> float:
        return float(self.test.labels.mean())
