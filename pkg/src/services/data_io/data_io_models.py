"""
Dataset Models
==============

The in-memory Dataset container and the data_io exception hierarchy.
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# =============================================================================
# Exceptions
# =============================================================================


class DataIoError(Exception):
    """Base exception for dataset loading and splitting errors."""

    pass


class DatasetFormatError(DataIoError):
    """Raised when a file does not follow the expected binary or text layout."""

    pass


class SplitFractionsError(DataIoError):
    """Raised when split fractions are negative or do not sum to 1."""

    pass


# =============================================================================
# Models
# =============================================================================


class Dataset(BaseModel):
    """
    A stack of uniformly shaped float64 samples with optional integer labels.

    Attributes:
        name: Human-readable dataset name
        samples: Array of shape (N, *sample_shape)
        labels: Optional int64 array of length N
        num_classes: Number of classes (None for unlabeled data)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(..., description="Dataset name")
    samples: np.ndarray = Field(..., description="Samples, shape (N, *sample_shape)")
    labels: Optional[np.ndarray] = Field(None, description="Integer class labels, length N")
    num_classes: Optional[int] = Field(None, ge=1, description="Number of classes")

    @field_validator("samples", mode="before")
    @classmethod
    def coerce_samples(cls, v):
        arr = np.asarray(v, dtype=np.float64).view()
        if arr.ndim < 2:
            raise ValueError(f"samples must have shape (N, ...), got {arr.shape}")
        arr.setflags(write=False)
        return arr

    @field_validator("labels", mode="before")
    @classmethod
    def coerce_labels(cls, v):
        if v is None:
            return None
        arr = np.asarray(v)
        if arr.ndim != 1:
            raise ValueError(f"labels must be one-dimensional, got {arr.shape}")
        if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("labels must be integers")
        arr = arr.astype(np.int64, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_lengths(self):
        if self.labels is not None:
            if len(self.labels) != len(self.samples):
                raise ValueError(
                    f"labels length {len(self.labels)} != sample count {len(self.samples)}"
                )
            if self.num_classes is None and len(self.labels):
                object.__setattr__(self, "num_classes", int(self.labels.max()) + 1)
        return self

    def __len__(self) -> int:
        return len(self.samples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None
            and other.labels is not None
            and np.array_equal(self.labels, other.labels)
        )
        return (
            self.name == other.name
            and self.num_classes == other.num_classes
            and np.array_equal(self.samples, other.samples)
            and same_labels
        )

    @property
    def sample_shape(self):
        return tuple(self.samples.shape[1:])

    def subset(self, indices: np.ndarray, name: Optional[str] = None) -> "Dataset":
        """New Dataset holding the given rows, in the given order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=name or self.name,
            samples=self.samples[indices],
            labels=None if self.labels is None else self.labels[indices],
            num_classes=self.num_classes,
        )
