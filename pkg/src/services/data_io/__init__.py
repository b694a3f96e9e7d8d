"""
Dataset I/O
===========

Loaders for IDX, CIFAR-10 binary and CSV files, stratified splitting, min-max
normalization and synthetic desk-scale generators.

Usage:
    from src.services.data_io import load_idx, split

    dataset = load_idx("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz")
    train, val, test = split(dataset, (2 / 3, 1 / 6, 1 / 6), seed=0)
"""

from .data_io_models import Dataset, DataIoError, DatasetFormatError, SplitFractionsError
from .data_io_constants import CIFAR_CLASS_NAMES, FMNIST_CLASS_NAMES
from .data_io_loaders import load_idx, load_cifar_binary, load_csv
from .data_io_helpers import (
    allocate_counts,
    balanced_class_indices,
    minmax_bounds,
    normalize_minmax,
    split,
    stratified_counts,
    synth_blobs,
    synth_images,
)

__all__ = [
    "Dataset",
    "DataIoError",
    "DatasetFormatError",
    "SplitFractionsError",
    "CIFAR_CLASS_NAMES",
    "FMNIST_CLASS_NAMES",
    "load_idx",
    "load_cifar_binary",
    "load_csv",
    "allocate_counts",
    "balanced_class_indices",
    "minmax_bounds",
    "normalize_minmax",
    "split",
    "stratified_counts",
    "synth_blobs",
    "synth_images",
]
