"""
Clustering Helpers
==================

Normalized mutual information, PCA and distance utilities. Logarithms are
natural; 0 * log(0) counts as 0.
"""

from typing import Optional

import numpy as np

from .clustering_models import ClusteringError, EmptyInputError, PCAResult


# =============================================================================
# NMI
# =============================================================================


def contingency_table(y: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Joint counts of (class, cluster) pairs; rows follow sorted distinct y values."""
    _, y_idx = np.unique(y, return_inverse=True)
    _, c_idx = np.unique(c, return_inverse=True)
    y_idx, c_idx = y_idx.reshape(-1), c_idx.reshape(-1)
    table = np.zeros((y_idx.max() + 1, c_idx.max() + 1), dtype=np.int64)
    np.add.at(table, (y_idx, c_idx), 1)
    return table


def entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def mutual_information(table: np.ndarray) -> float:
    n = table.sum()
    p = table / n
    py = p.sum(axis=1, keepdims=True)
    pc = p.sum(axis=0, keepdims=True)
    nz = p > 0
    return float(np.sum(p[nz] * np.log(p[nz] / (py @ pc)[nz])))


def nmi(y: np.ndarray, c: np.ndarray) -> float:
    """
    Normalized mutual information 2 I(Y; C) / (H(Y) + H(C)).

    When one labeling is constant the score is 0, unless both are constant,
    which scores 1.

    Raises:
        EmptyInputError: If the labelings are empty
        ClusteringError: If their lengths differ

    Example:
        >>> nmi(np.array([0, 0, 1, 1]), np.array([5, 5, 2, 2]))
        1.0
    """
    y = np.asarray(y).reshape(-1)
    c = np.asarray(c).reshape(-1)
    if len(y) != len(c):
        raise ClusteringError(f"Labelings differ in length: {len(y)} vs {len(c)}")
    if len(y) == 0:
        raise EmptyInputError("NMI of empty labelings")

    table = contingency_table(y, c)
    h_y = entropy(table.sum(axis=1))
    h_c = entropy(table.sum(axis=0))
    if h_y == 0.0 or h_c == 0.0:
        return 1.0 if h_y == h_c else 0.0
    return float(min(1.0, max(0.0, 2.0 * mutual_information(table) / (h_y + h_c))))


# =============================================================================
# PCA
# =============================================================================


def pca_reduce(
    data: np.ndarray,
    n_components: Optional[int] = None,
    variance_fraction: Optional[float] = None,
) -> PCAResult:
    """
    Project mean-centered data onto its top principal components.

    Components come from the eigendecomposition of the sample covariance; each
    basis vector is signed so its largest-magnitude entry is positive.

    Args:
        data: Array of shape (N, ...); per-sample axes are flattened
        n_components: Number of components to keep
        variance_fraction: Keep the fewest components whose explained-variance
            ratios sum to at least this value, in (0, 1]

    Returns:
        PCAResult

    Raises:
        EmptyInputError: If data is empty
        ClusteringError: If n_components exceeds the feature count or both or
            neither target is given
    """
    x = np.asarray(data, dtype=np.float64)
    if x.size == 0:
        raise EmptyInputError("PCA of empty data")
    x = x.reshape(len(x), -1)
    features = x.shape[1]
    if (n_components is None) == (variance_fraction is None):
        raise ClusteringError("Give exactly one of n_components or variance_fraction")
    if n_components is not None and not 1 <= n_components <= features:
        raise ClusteringError(f"n_components={n_components} outside 1..{features}")
    if variance_fraction is not None and not 0.0 < variance_fraction <= 1.0:
        raise ClusteringError(f"variance_fraction must lie in (0, 1], got {variance_fraction}")

    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / max(len(x) - 1, 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.clip(eigvals[::-1], 0.0, None)
    eigvecs = eigvecs[:, ::-1]

    pivots = np.argmax(np.abs(eigvecs), axis=0)
    signs = np.sign(eigvecs[pivots, np.arange(features)])
    eigvecs = eigvecs * np.where(signs == 0, 1.0, signs)

    total = eigvals.sum()
    ratios = eigvals / total if total > 0 else np.full(features, 1.0 / features)
    if n_components is None:
        cumulative = np.cumsum(ratios)
        n_components = int(np.searchsorted(cumulative, variance_fraction - 1e-12) + 1)
        n_components = min(n_components, features)

    basis = eigvecs[:, :n_components]
    return PCAResult(
        projected=centered @ basis,
        basis=basis,
        mean=mean,
        explained_variance_ratio=ratios,
    )


# =============================================================================
# Distances
# =============================================================================


def squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, shape (N, k), clipped at 0."""
    cross = points @ centroids.T
    d2 = np.sum(points**2, axis=1)[:, np.newaxis] - 2.0 * cross + np.sum(centroids**2, axis=1)
    return np.maximum(d2, 0.0)


def assigned_inertia(points: np.ndarray, centroids: np.ndarray, assignments: np.ndarray) -> float:
    """Sum of squared distances of every point to its assigned centroid."""
    diff = points - centroids[assignments]
    return float(np.sum(diff * diff))


def as_points(data) -> np.ndarray:
    points = np.asarray(data, dtype=np.float64)
    if points.ndim == 0 or len(points) == 0:
        raise EmptyInputError("No points to cluster")
    return points.reshape(len(points), -1)
