"""
Clustering
==========

K-means, NMI, PCA and the encode-cluster-score evaluation pipeline.

Usage:
    from src.services.clustering import kmeans, nmi

    result = kmeans(points, k=3, seed=0)
    score = nmi(labels, result.assignments)
"""

from .clustering_models import (
    ClusteringError,
    TooFewDistinctPointsError,
    EmptyInputError,
    KMeansInit,
    KMeansResult,
    PCAResult,
)
from .clustering_helpers import contingency_table, entropy, mutual_information, nmi, pca_reduce
from .clustering_service import (
    kmeans,
    kmeans_restarts,
    Reducer,
    EnsembleReducer,
    SingleAEReducer,
    PCAReducer,
    PrecomputedReducer,
    eval_clustering,
)

__all__ = [
    "ClusteringError",
    "TooFewDistinctPointsError",
    "EmptyInputError",
    "KMeansInit",
    "KMeansResult",
    "PCAResult",
    "contingency_table",
    "entropy",
    "mutual_information",
    "nmi",
    "pca_reduce",
    "kmeans",
    "kmeans_restarts",
    "Reducer",
    "EnsembleReducer",
    "SingleAEReducer",
    "PCAReducer",
    "PrecomputedReducer",
    "eval_clustering",
]
