"""
Clustering Models
=================

K-means and PCA results plus the clustering exception hierarchy.
"""

from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class ClusteringError(Exception):
    """Base exception for K-means, PCA and NMI computations."""

    pass


class TooFewDistinctPointsError(ClusteringError):
    """Raised when k exceeds the number of distinct points."""

    pass


class EmptyInputError(ClusteringError):
    """Raised when a clustering routine receives no points or labels."""

    pass


KMeansInit = Literal["kmeanspp", "random"]


class KMeansResult(BaseModel):
    """
    Outcome of one Lloyd run.

    Attributes:
        centroids: Array of shape (k, features)
        assignments: Cluster index of every point, each the nearest centroid
        inertia: Sum of squared distances of points to their centroid
        iterations: Lloyd iterations performed
        inertia_history: Inertia after every iteration, nonincreasing
        seed: Seed of the run
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    iterations: int = Field(..., ge=0)
    inertia_history: List[float] = Field(default_factory=list)
    seed: int = 0

    @property
    def k(self) -> int:
        return len(self.centroids)


class PCAResult(BaseModel):
    """
    Principal component projection.

    Attributes:
        projected: Centered data in the component basis, shape (N, n_components)
        basis: Orthonormal components as columns, shape (features, n_components)
        mean: Feature means removed before projecting
        explained_variance_ratio: Share of variance of every component (all of
            them, not only the kept ones), nonincreasing
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    projected: np.ndarray
    basis: np.ndarray
    mean: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.basis.shape[1]

    def transform(self, data: np.ndarray) -> np.ndarray:
        """Project new data with the fitted mean and basis."""
        flat = np.asarray(data, dtype=np.float64).reshape(len(data), -1)
        return (flat - self.mean) @ self.basis
