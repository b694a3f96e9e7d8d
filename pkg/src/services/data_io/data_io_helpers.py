"""
Dataset Helpers
===============

Pure functions for splitting, normalizing and generating datasets. Every
random choice goes through a numpy Generator seeded by the caller.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from .data_io_models import Dataset, SplitFractionsError

logger = logging.getLogger(__name__)


# =============================================================================
# Splitting
# =============================================================================


def allocate_counts(total: int, fractions: Sequence[float]) -> np.ndarray:
    """
    Turn fractions into integer counts summing to total (largest remainder).

    Example:
        >>> allocate_counts(60000, [2 / 3, 1 / 6, 1 / 6]).tolist()
        [40000, 10000, 10000]
    """
    exact = np.asarray(fractions, dtype=np.float64) * total
    counts = np.floor(exact + 1e-9).astype(np.int64)
    remainder = total - int(counts.sum())
    if remainder > 0:
        order = np.argsort(-(exact - counts), kind="stable")
        counts[order[:remainder]] += 1
    return counts


def _validate_fractions(fractions: Sequence[float]) -> np.ndarray:
    fr = np.asarray(fractions, dtype=np.float64)
    if fr.shape != (3,):
        raise SplitFractionsError(f"Expected three fractions (train, val, test), got {fractions}")
    if np.any(fr < 0) or abs(fr.sum() - 1.0) > 1e-9:
        raise SplitFractionsError(f"Fractions must be nonnegative and sum to 1, got {fractions}")
    return fr


def stratified_counts(
    class_sizes: Sequence[int], fractions: Sequence[float], rng: np.random.Generator
) -> np.ndarray:
    """
    Per-class part sizes, shape (classes, parts).

    Every cell starts at the floor of class_size * fraction and gains at most
    one sample, and the column sums equal allocate_counts(sum(class_sizes),
    fractions). Leftover samples of each class go to the parts still short of
    their total, largest shortfall first.
    """
    sizes = np.asarray(class_sizes, dtype=np.int64)
    fr = np.asarray(fractions, dtype=np.float64)
    exact = sizes[:, np.newaxis] * fr[np.newaxis, :]
    counts = np.floor(exact + 1e-9).astype(np.int64)
    leftover = sizes - counts.sum(axis=1)
    shortfall = allocate_counts(int(sizes.sum()), fr) - counts.sum(axis=0)
    remainder = exact - counts

    for cls in np.lexsort((rng.random(len(sizes)), -leftover)):
        if leftover[cls] == 0:
            continue
        ranked = np.lexsort((-remainder[cls], -shortfall))
        chosen = ranked[: leftover[cls]]
        counts[cls, chosen] += 1
        shortfall[chosen] -= 1
    return counts


def split(
    dataset: Dataset, fractions: Sequence[float], seed: int = 0
) -> Tuple[Dataset, Dataset, Dataset]:
    """
    Deterministic shuffled train/val/test partition.

    Labeled datasets are split stratified: each class is cut into parts of
    size class_size * fraction, rounded up or down, so every part holds each
    class within one sample of its share. Part sizes always follow
    allocate_counts over the whole dataset.

    Args:
        dataset: Dataset to partition
        fractions: (train, val, test) fractions summing to 1
        seed: Seed of the shuffling Generator

    Returns:
        Tuple of (train, val, test)

    Raises:
        SplitFractionsError: If fractions are invalid
    """
    fr = _validate_fractions(fractions)
    rng = np.random.default_rng(seed)

    if dataset.labels is None:
        order = rng.permutation(len(dataset))
        bounds = np.cumsum(allocate_counts(len(dataset), fr))[:-1]
        parts = tuple(np.split(order, bounds))
    else:
        classes = np.unique(dataset.labels)
        members = [rng.permutation(np.flatnonzero(dataset.labels == c)) for c in classes]
        counts = stratified_counts([len(m) for m in members], fr, rng)
        pieces = [np.split(m, np.cumsum(row)[:-1]) for m, row in zip(members, counts)]
        parts = tuple(
            rng.permutation(np.concatenate([piece[p] for piece in pieces])) for p in range(3)
        )

    names = ("train", "val", "test")
    train, val, test = (
        dataset.subset(idx, name=f"{dataset.name}-{tag}") for idx, tag in zip(parts, names)
    )
    logger.info(f"Split {dataset.name}: {len(train)}/{len(val)}/{len(test)} (seed={seed})")
    return train, val, test


def balanced_class_indices(
    labels: np.ndarray, rng: np.random.Generator, classes: Optional[Sequence[int]] = None
) -> np.ndarray:
    """
    Indices drawing the same number of samples from every class (the minimum
    per-class count), shuffled.
    """
    classes = np.unique(labels) if classes is None else np.asarray(classes)
    members = [np.flatnonzero(labels == c) for c in classes]
    per_class = min(len(m) for m in members)
    picked = np.concatenate([rng.choice(m, size=per_class, replace=False) for m in members])
    return rng.permutation(picked)


# =============================================================================
# Normalization
# =============================================================================


def minmax_bounds(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Per-feature (low, span) of a dataset; constant features get span 1."""
    flat = dataset.samples.reshape(len(dataset), -1)
    low = flat.min(axis=0)
    span = flat.max(axis=0) - low
    span[span == 0] = 1.0
    return low, span


def normalize_minmax(
    dataset: Dataset, bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None
) -> Dataset:
    """
    Rescale every feature to [0, 1]; constant features map to 0.

    Pass the training pool's minmax_bounds to put a held-out set on the same
    scale. Its values may then fall outside [0, 1].
    """
    low, span = minmax_bounds(dataset) if bounds is None else bounds
    flat = dataset.samples.reshape(len(dataset), -1)
    if flat.shape[1] != low.shape[0]:
        raise ValueError(
            f"Bounds cover {low.shape[0]} features but {dataset.name} has {flat.shape[1]}"
        )
    scaled = ((flat - low) / span).reshape(dataset.samples.shape)
    return Dataset(
        name=dataset.name,
        samples=scaled,
        labels=dataset.labels,
        num_classes=dataset.num_classes,
    )


# =============================================================================
# Synthetic data
# =============================================================================


def synth_blobs(
    n: int, k: int, dim: int, spread: float = 1.0, seed: int = 0, separation: float = 10.0
) -> Dataset:
    """
    Isotropic Gaussian blobs with known labels.

    Centers are drawn uniformly from [−separation, separation]^dim; sample i
    belongs to class i mod k.

    Args:
        n: Number of samples
        k: Number of blobs
        dim: Feature dimension
        spread: Standard deviation around each center (0 gives identical points)
        seed: Generator seed
        separation: Half-width of the center box
    """
    if n < 1 or k < 1 or dim < 1 or spread < 0:
        raise ValueError(f"Invalid blob parameters n={n}, k={k}, dim={dim}, spread={spread}")
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-separation, separation, size=(k, dim))
    labels = np.arange(n) % k
    samples = centers[labels] + spread * rng.standard_normal((n, dim))
    return Dataset(name=f"blobs-{k}x{dim}", samples=samples, labels=labels, num_classes=k)


def _bar_image(size: int, orientation: str, position: int, intensity: float) -> np.ndarray:
    image = np.zeros((size, size))
    rows = slice(position, position + 2)
    if orientation == "horizontal":
        image[rows, :] = intensity
    else:
        image[:, rows] = intensity
    return image


def synth_images(
    n: int, pattern_classes: int = 4, size: int = 8, noise: float = 0.05, seed: int = 0
) -> Dataset:
    """
    Tiny single-channel bar images with additive noise, clamped to [0, 1].

    Even classes are horizontal bars, odd classes vertical bars; each class
    sits at its own position and every sample jitters that position by at most
    one pixel and draws its bar intensity from [0.6, 1].

    Args:
        n: Number of images
        pattern_classes: Number of bar classes
        size: Image side length (at least 4)
        noise: Standard deviation of the additive Gaussian noise
        seed: Generator seed

    Returns:
        Dataset of shape (n, 1, size, size)
    """
    if n < 1 or pattern_classes < 1 or size < 4 or noise < 0:
        raise ValueError(
            f"Invalid image parameters n={n}, classes={pattern_classes}, size={size}, noise={noise}"
        )
    rng = np.random.default_rng(seed)
    per_orientation = (pattern_classes + 1) // 2
    slots = np.linspace(1, size - 3, per_orientation).round().astype(int)

    labels = np.arange(n) % pattern_classes
    images = np.empty((n, 1, size, size))
    for i, cls in enumerate(labels):
        orientation = "horizontal" if cls % 2 == 0 else "vertical"
        position = int(np.clip(slots[cls // 2] + rng.integers(-1, 2), 0, size - 2))
        intensity = rng.uniform(0.6, 1.0)
        images[i, 0] = _bar_image(size, orientation, position, intensity)

    images += noise * rng.standard_normal(images.shape)
    return Dataset(
        name=f"bars-{size}x{size}",
        samples=np.clip(images, 0.0, 1.0),
        labels=labels,
        num_classes=pattern_classes,
    )
