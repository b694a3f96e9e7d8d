"""
Boosted Ensemble Helpers
========================

Stateless pieces of the boosting loop: weight initialization, weighted
resampling, per-sample reconstruction error and seed derivation.
"""

import logging
from typing import Iterator, List, Union

import numpy as np

from src.services.data_io import Dataset

from .boosted_ensemble_models import InvalidSampleWeightsError, SampleWeights

logger = logging.getLogger(__name__)

# SeedSequence children of a run: decoder, batch sampler, then one per encoder
DECODER_STREAM = 0
SAMPLER_STREAM = 1
FIRST_ENCODER_STREAM = 2


def init_sample_weights(n: int) -> SampleWeights:
    """
    Uniform weights 1/n.

    Example:
        >>> init_sample_weights(4).w.tolist()
        [0.25, 0.25, 0.25, 0.25]
    """
    if n < 1:
        raise InvalidSampleWeightsError(f"Need at least one sample, got n={n}")
    return SampleWeights(w=np.full(n, 1.0 / n))


def sample_batch(
    weights: Union[SampleWeights, np.ndarray], Q: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Draw Q i.i.d. indices with replacement, index i with probability w_i.

    Args:
        weights: SampleWeights, or raw nonnegative scores that get normalized
        Q: Number of draws
        rng: Generator whose state advances with the draw

    Raises:
        InvalidSampleWeightsError: If raw scores are all zero, negative or non-finite
    """
    if Q < 1:
        raise ValueError(f"Batch size must be positive, got {Q}")
    if not isinstance(weights, SampleWeights):
        weights = SampleWeights.from_unnormalized(weights)
    return rng.choice(len(weights), size=Q, replace=True, p=weights.w)


def per_sample_squared_error(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sum of squared differences over all features, one value per sample."""
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return np.sum((diff * diff).reshape(len(diff), -1), axis=1)


def weights_from_errors(errors: np.ndarray) -> SampleWeights:
    """Normalize per-sample errors into weights; all-zero errors give uniform weights."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.sum() <= 0:
        logger.warning("All reconstruction errors are zero; falling back to uniform weights")
        return init_sample_weights(len(errors))
    return SampleWeights.from_unnormalized(errors)


def as_samples(data: Union[Dataset, np.ndarray]) -> np.ndarray:
    """Sample array of a Dataset, or the array itself."""
    if isinstance(data, Dataset):
        return data.samples
    return np.asarray(data, dtype=np.float64)


def iter_chunks(n: int, size: int) -> Iterator[slice]:
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Derive `count` independent integer seeds from one root seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]
