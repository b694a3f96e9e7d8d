"""
Dataset Loaders
===============

Readers for IDX (MNIST / Fashion-MNIST), CIFAR-10 binary batches and numeric
CSV files. Pixel data is scaled to [0, 1] by dividing by 255.
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import polars as pl

from .data_io_constants import (
    CIFAR_CHANNELS,
    CIFAR_NUM_CLASSES,
    CIFAR_RECORD_BYTES,
    CIFAR_SIDE,
    IDX_IMAGES_HEADER_BYTES,
    IDX_IMAGES_MAGIC,
    IDX_LABELS_HEADER_BYTES,
    IDX_LABELS_MAGIC,
    PIXEL_MAX,
)
from .data_io_models import Dataset, DatasetFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as f:
            return f.read()
    return path.read_bytes()


def _check_magic(raw: bytes, expected: int, path: PathLike) -> None:
    if len(raw) < 4:
        raise DatasetFormatError(f"{path}: file too short for an IDX magic number at offset 0")
    (magic,) = struct.unpack(">I", raw[:4])
    if magic != expected:
        raise DatasetFormatError(
            f"{path}: bad IDX magic 0x{magic:08x} at offset 0 (expected 0x{expected:08x})"
        )


# =============================================================================
# IDX
# =============================================================================


def read_idx_images(path: PathLike) -> np.ndarray:
    """
    Parse an IDX image file into a uint8 array of shape (N, rows, cols).

    Raises:
        DatasetFormatError: On a bad magic number or a truncated payload
    """
    raw = _read_bytes(path)
    _check_magic(raw, IDX_IMAGES_MAGIC, path)
    if len(raw) < IDX_IMAGES_HEADER_BYTES:
        raise DatasetFormatError(f"{path}: truncated IDX image header ({len(raw)} bytes)")
    _, count, rows, cols = struct.unpack(">IIII", raw[:IDX_IMAGES_HEADER_BYTES])
    expected = IDX_IMAGES_HEADER_BYTES + count * rows * cols
    if len(raw) != expected:
        raise DatasetFormatError(
            f"{path}: expected {expected} bytes for {count} images of {rows}x{cols}, "
            f"found {len(raw)}"
        )
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=IDX_IMAGES_HEADER_BYTES)
    return pixels.reshape(count, rows, cols)


def read_idx_labels(path: PathLike) -> np.ndarray:
    """
    Parse an IDX label file into a uint8 array of shape (N,).

    Raises:
        DatasetFormatError: On a bad magic number or a truncated payload
    """
    raw = _read_bytes(path)
    _check_magic(raw, IDX_LABELS_MAGIC, path)
    if len(raw) < IDX_LABELS_HEADER_BYTES:
        raise DatasetFormatError(f"{path}: truncated IDX label header ({len(raw)} bytes)")
    _, count = struct.unpack(">II", raw[:IDX_LABELS_HEADER_BYTES])
    if len(raw) != IDX_LABELS_HEADER_BYTES + count:
        raise DatasetFormatError(
            f"{path}: expected {IDX_LABELS_HEADER_BYTES + count} bytes for {count} labels, "
            f"found {len(raw)}"
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=IDX_LABELS_HEADER_BYTES)


def load_idx(images_path: PathLike, labels_path: PathLike, name: Optional[str] = None) -> Dataset:
    """
    Load an IDX image/label pair (MNIST-family layout).

    Args:
        images_path: IDX file with magic 0x00000803 (optionally .gz)
        labels_path: IDX file with magic 0x00000801 (optionally .gz)
        name: Dataset name (defaults to the image file stem)

    Returns:
        Dataset of shape (N, 1, rows, cols) with values byte / 255

    Raises:
        DatasetFormatError: Bad magic, truncated file, or image/label count mismatch

    Example:
        >>> ds = load_idx("train-images-idx3-ubyte", "train-labels-idx1-ubyte")
        >>> ds.sample_shape
        (1, 28, 28)
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise DatasetFormatError(
            f"Image count {len(images)} in {images_path} != label count {len(labels)} "
            f"in {labels_path}"
        )
    samples = (images.astype(np.float64) / PIXEL_MAX)[:, np.newaxis, :, :]
    logger.info(f"Loaded {len(samples)} IDX images of {images.shape[1]}x{images.shape[2]}")
    return Dataset(
        name=name or Path(images_path).stem,
        samples=samples,
        labels=labels.astype(np.int64),
        num_classes=int(labels.max()) + 1 if len(labels) else None,
    )


# =============================================================================
# CIFAR-10 binary
# =============================================================================


def load_cifar_binary(paths: Sequence[PathLike], name: str = "cifar10") -> Dataset:
    """
    Load one or more CIFAR-10 binary batch files.

    Each 3073-byte record is a label byte followed by 3×32×32 channel-major pixels.

    Args:
        paths: Batch files, concatenated in the given order
        name: Dataset name

    Returns:
        Dataset of shape (N, 3, 32, 32) with values byte / 255

    Raises:
        DatasetFormatError: If a file length is not a multiple of 3073
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]

    chunks = []
    for path in paths:
        raw = _read_bytes(path)
        if len(raw) == 0 or len(raw) % CIFAR_RECORD_BYTES:
            raise DatasetFormatError(
                f"{path}: length {len(raw)} is not a positive multiple of {CIFAR_RECORD_BYTES}"
            )
        chunks.append(np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES))
    records = np.concatenate(chunks, axis=0)

    labels = records[:, 0].astype(np.int64)
    pixels = records[:, 1:].reshape(-1, CIFAR_CHANNELS, CIFAR_SIDE, CIFAR_SIDE)
    logger.info(f"Loaded {len(records)} CIFAR-10 records from {len(chunks)} file(s)")
    return Dataset(
        name=name,
        samples=pixels.astype(np.float64) / PIXEL_MAX,
        labels=labels,
        num_classes=CIFAR_NUM_CLASSES,
    )


# =============================================================================
# CSV
# =============================================================================


def load_csv(
    path: PathLike,
    label_column: Optional[int] = None,
    has_header: bool = False,
    name: Optional[str] = None,
) -> Dataset:
    """
    Load a rectangular numeric CSV file, one sample per row.

    Args:
        path: CSV file
        label_column: Zero-based index of an integer label column to split off
        has_header: Whether the first row holds column names
        name: Dataset name (defaults to the file stem)

    Returns:
        Dataset of shape (rows, features)

    Raises:
        DatasetFormatError: Empty file, ragged rows or non-numeric cells

    Example:
        >>> load_csv("points.csv", label_column=2).sample_shape
        (2,)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dataset file not found: {path}")
    if path.stat().st_size == 0:
        raise DatasetFormatError(f"{path}: empty CSV file")

    try:
        frame = pl.read_csv(path, has_header=has_header, infer_schema=False)
    except pl.exceptions.PolarsError as e:
        raise DatasetFormatError(f"{path}: could not parse CSV ({e})") from e

    if frame.height == 0:
        raise DatasetFormatError(f"{path}: CSV holds no data rows")
    if frame.null_count().sum_horizontal().item() > 0:
        raise DatasetFormatError(f"{path}: ragged rows or empty cells")

    try:
        values = frame.select(pl.all().str.strip_chars().cast(pl.Float64, strict=True)).to_numpy()
    except pl.exceptions.PolarsError as e:
        raise DatasetFormatError(f"{path}: non-numeric cell ({e})") from e

    labels = None
    if label_column is not None:
        if not 0 <= label_column < values.shape[1]:
            raise DatasetFormatError(
                f"{path}: label column {label_column} outside 0..{values.shape[1] - 1}"
            )
        labels = values[:, label_column]
        if not np.all(labels == np.round(labels)):
            raise DatasetFormatError(f"{path}: label column {label_column} is not integral")
        values = np.delete(values, label_column, axis=1)
        if values.shape[1] == 0:
            raise DatasetFormatError(f"{path}: no feature columns besides the label column")

    logger.info(f"Loaded {values.shape[0]} rows x {values.shape[1]} features from {path}")
    return Dataset(
        name=name or path.stem,
        samples=values,
        labels=None if labels is None else labels.astype(np.int64),
    )
