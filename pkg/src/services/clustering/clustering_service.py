"""
Latent-Space Clustering
=======================

Lloyd's K-means with k-means++ or random seeding, seeded restarts, and the
evaluation pipeline that encodes data with a reducer (boosted ensemble, single
autoencoder or PCA), clusters the codes and scores them with NMI.

Usage:
    from src.services.clustering import EnsembleReducer, PCAReducer, eval_clustering

    report = eval_clustering(
        [EnsembleReducer(model), PCAReducer(n_components=10)],
        dataset.samples, dataset.labels, k=10, seeds=range(10),
    )
"""

import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.services.boosted_ensemble import EnsembleModel, encode
from src.shared_utils.config import get_settings
from src.services.persistence import EvalReport

from .clustering_helpers import (
    as_points,
    assigned_inertia,
    nmi,
    pca_reduce,
    squared_distances,
)
from .clustering_models import (
    ClusteringError,
    KMeansInit,
    KMeansResult,
    TooFewDistinctPointsError,
)

logger = logging.getLogger(__name__)


# =============================================================================
# K-means
# =============================================================================


def _init_kmeanspp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = [points[rng.integers(len(points))]]
    d2 = squared_distances(points, centroids[0][np.newaxis])[:, 0]
    for _ in range(1, k):
        idx = rng.choice(len(points), p=d2 / d2.sum())
        centroids.append(points[idx])
        d2 = np.minimum(d2, squared_distances(points, points[idx][np.newaxis])[:, 0])
    return np.array(centroids)


def _init_random(distinct: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    return distinct[rng.choice(len(distinct), size=k, replace=False)].copy()


def _refill_empty(
    points: np.ndarray, centroids: np.ndarray, assignments: np.ndarray, k: int
) -> np.ndarray:
    """Move the point farthest from the largest cluster's centroid into each empty cluster."""
    counts = np.bincount(assignments, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        largest = int(np.argmax(counts))
        members = np.flatnonzero(assignments == largest)
        gaps = np.sum((points[members] - centroids[largest]) ** 2, axis=1)
        moved = members[int(np.argmax(gaps))]
        assignments[moved] = empty
        counts[largest] -= 1
        counts[empty] += 1
        logger.warning(f"K-means cluster {empty} empty; reassigned point {moved}")
    return assignments


def _centroid_means(points: np.ndarray, assignments: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(assignments, minlength=k).astype(np.float64)
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, assignments, points)
    return sums / counts[:, np.newaxis]


def kmeans(
    points: np.ndarray,
    k: int,
    init: KMeansInit = "kmeanspp",
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-8,
) -> KMeansResult:
    """
    Lloyd's algorithm.

    Iterates assignment and mean updates until the assignment no longer
    changes, the largest centroid shift drops below tol, or max_iter is
    reached. The returned assignments are the nearest centroids (lowest index
    on ties) of the returned centroids.

    Args:
        points: Array of shape (N, ...); per-sample axes are flattened
        k: Number of clusters
        init: "kmeanspp" (D²-weighted seeding) or "random" (k distinct points)
        seed: Seed of the initialization Generator
        max_iter: Iteration cap
        tol: Centroid shift threshold

    Raises:
        EmptyInputError: If there are no points
        TooFewDistinctPointsError: If k exceeds the number of distinct points

    Example:
        >>> pts = np.array([[0, 0], [0, 1], [10, 0], [10, 1]], dtype=float)
        >>> kmeans(pts, 2, seed=0).inertia
        1.0
    """
    points = as_points(points)
    if k < 1:
        raise ClusteringError(f"k must be positive, got {k}")
    distinct = np.unique(points, axis=0)
    if k > len(distinct):
        raise TooFewDistinctPointsError(f"k={k} exceeds {len(distinct)} distinct points")

    rng = np.random.default_rng(seed)
    if init == "kmeanspp":
        centroids = _init_kmeanspp(points, k, rng)
    elif init == "random":
        centroids = _init_random(distinct, k, rng)
    else:
        raise ClusteringError(f"Unknown K-means init '{init}'")

    assignments = np.argmin(squared_distances(points, centroids), axis=1)
    history: List[float] = []
    iterations = 0
    for iterations in range(1, max_iter + 1):
        assignments = _refill_empty(points, centroids, assignments, k)
        updated = _centroid_means(points, assignments, k)
        history.append(assigned_inertia(points, updated, assignments))
        shift = float(np.sqrt(np.max(np.sum((updated - centroids) ** 2, axis=1))))
        centroids = updated

        reassigned = np.argmin(squared_distances(points, centroids), axis=1)
        converged = np.array_equal(reassigned, assignments) or shift < tol
        assignments = reassigned
        if converged:
            break

    inertia = assigned_inertia(points, centroids, assignments)
    logger.debug(f"K-means k={k} seed={seed}: {iterations} iterations, inertia {inertia:.6g}")
    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        iterations=iterations,
        inertia_history=history,
        seed=seed,
    )


def _restart_seeds(seed: int, n_init: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(n_init)
    return [int(child.generate_state(1)[0]) for child in children]


def kmeans_restarts(
    points: np.ndarray,
    k: int,
    n_init: Optional[int] = None,
    seed: int = 0,
    init: KMeansInit = "kmeanspp",
    max_iter: int = 300,
    tol: float = 1e-8,
) -> Tuple[KMeansResult, List[KMeansResult]]:
    """
    Run K-means n_init times with independent seeds derived from `seed`.

    Returns:
        Tuple of (lowest-inertia run, every run); the earliest run wins ties
    """
    n_init = n_init or get_settings().kmeans_restarts
    runs = [
        kmeans(points, k, init=init, seed=s, max_iter=max_iter, tol=tol)
        for s in _restart_seeds(seed, n_init)
    ]
    best = min(range(len(runs)), key=lambda i: (runs[i].inertia, i))
    return runs[best], runs


# =============================================================================
# Reducers
# =============================================================================


class Reducer:
    """Maps samples of shape (N, ...) to feature vectors of shape (N, d)."""

    name: str = "reducer"

    def transform(self, samples: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class EnsembleReducer(Reducer):
    """Averaged latent code of a trained ensemble."""

    def __init__(self, model: EnsembleModel, name: str = "ensemble"):
        self.model = model
        self.name = name

    def transform(self, samples: np.ndarray) -> np.ndarray:
        settings = get_settings()
        codes = [
            encode(self.model, samples[start : start + settings.eval_batch_size])
            for start in range(0, len(samples), settings.eval_batch_size)
        ]
        return np.concatenate(codes, axis=0).reshape(len(samples), -1)


class SingleAEReducer(EnsembleReducer):
    """Latent code of one trained autoencoder (a one-encoder ensemble)."""

    def __init__(self, model: EnsembleModel, name: str = "single-ae"):
        if model.M != 1:
            raise ClusteringError(f"Single-AE reducer needs one encoder, model has {model.M}")
        super().__init__(model, name)


class PCAReducer(Reducer):
    """Principal components fitted on the data being clustered."""

    def __init__(
        self,
        n_components: Optional[int] = None,
        variance_fraction: Optional[float] = None,
        name: str = "pca",
    ):
        self.n_components = n_components
        self.variance_fraction = variance_fraction
        self.name = name

    def transform(self, samples: np.ndarray) -> np.ndarray:
        result = pca_reduce(samples, self.n_components, self.variance_fraction)
        logger.info(f"PCA kept {result.n_components} components")
        return result.projected


class PrecomputedReducer(Reducer):
    """Fixed features supplied up front, ignoring the samples."""

    def __init__(self, features: np.ndarray, name: str = "precomputed"):
        self.features = np.asarray(features, dtype=np.float64)
        self.name = name

    def transform(self, samples: np.ndarray) -> np.ndarray:
        if len(samples) != len(self.features):
            raise ClusteringError(f"{len(self.features)} features for {len(samples)} samples")
        return self.features.reshape(len(self.features), -1)


# =============================================================================
# Evaluation
# =============================================================================


def eval_clustering(
    reducers: Sequence[Reducer],
    data: np.ndarray,
    true_labels: np.ndarray,
    k: int,
    seeds: Optional[Iterable[int]] = None,
    init: KMeansInit = "kmeanspp",
    max_iter: int = 300,
    tol: float = 1e-8,
) -> EvalReport:
    """
    Encode, cluster and score every reducer.

    For each reducer K-means runs once per seed. The report holds "nmi" per
    seed, "nmi_best" (NMI of the lowest-inertia run, lowest seed on ties),
    "nmi_mean" and "nmi_std" across seeds, all tagged with the reducer name.

    Args:
        reducers: Encodings to compare
        data: Samples, shape (N, ...)
        true_labels: Class of every sample
        k: Number of clusters (normally the number of classes)
        seeds: K-means seeds (defaults to 0..kmeans_restarts-1 from settings)

    Returns:
        EvalReport whose config records the clustering protocol
    """
    data = np.asarray(data, dtype=np.float64)
    true_labels = np.asarray(true_labels)
    seeds = list(range(get_settings().kmeans_restarts) if seeds is None else seeds)
    if not seeds:
        raise ClusteringError("At least one K-means seed is required")

    report = EvalReport(
        kind="eval-cluster",
        config={
            "k": k,
            "init": init,
            "seeds": seeds,
            "max_iter": max_iter,
            "tol": tol,
            "selection": "lowest inertia, lowest seed on ties",
        },
    )
    for reducer in reducers:
        features = reducer.transform(data)
        runs = [kmeans(features, k, init=init, seed=s, max_iter=max_iter, tol=tol) for s in seeds]
        scores = [nmi(true_labels, run.assignments) for run in runs]
        for s, score in zip(seeds, scores):
            report.add_metric("nmi", score, reducer=reducer.name, seed=s)

        best = min(range(len(runs)), key=lambda i: (runs[i].inertia, seeds[i]))
        report.add_metric("nmi_best", scores[best], reducer=reducer.name, seed=seeds[best])
        report.add_metric("nmi_mean", float(np.mean(scores)), reducer=reducer.name)
        report.add_metric("nmi_std", float(np.std(scores)), reducer=reducer.name)
        report.add_metric("inertia_best", runs[best].inertia, reducer=reducer.name)
        logger.info(
            f"{reducer.name}: NMI best {scores[best]:.4f}, "
            f"mean {np.mean(scores):.4f} ± {np.std(scores):.4f}"
        )
    return report
