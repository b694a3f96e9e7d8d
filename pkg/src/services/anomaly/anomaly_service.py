"""
One-Class Anomaly Detection
===========================

Builds one-class experiments from a labeled dataset, scores samples by
reconstruction error and reports AUC for the normal class overall and against
each anomaly class.

Usage:
    from src.services.anomaly import build_one_class_split, eval_anomaly

    split = build_one_class_split(dataset, normal_class=1, seed=0)
    model, _ = train_boosted(enc, dec, split.train, split.val, config)
    report = eval_anomaly(model, split)
"""

import logging
from typing import Optional, Union

import numpy as np

from src.services.boosted_ensemble import EnsembleModel, UntrainedModelError, reconstruction_errors
from src.services.data_io import Dataset, balanced_class_indices
from src.services.persistence import EvalReport

from .anomaly_helpers import auc
from .anomaly_models import AnomalyError, ClassNotFoundError, OneClassSplit, ScoredSet

logger = logging.getLogger(__name__)


def _round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def _binary(dataset: Dataset, labels: np.ndarray, name: str) -> Dataset:
    return Dataset(name=name, samples=dataset.samples, labels=labels, num_classes=2)


def build_one_class_split(
    dataset: Dataset,
    normal_class: int,
    val_fraction: float = 0.1,
    seed: int = 0,
    test_dataset: Optional[Dataset] = None,
    test_fraction: float = 0.2,
) -> OneClassSplit:
    """
    Construct a one-class experiment.

    Without test_dataset, test_fraction of every class is reserved for testing
    first. The remaining normal-class samples are split into train and val, with
    val holding round(val_fraction * count) samples. The test pool is balanced
    to the smallest per-class count.

    Args:
        dataset: Labeled dataset
        normal_class: Label treated as normal
        val_fraction: Share of normal samples held out for validation, in (0, 1)
        seed: Seed of the split Generator
        test_dataset: Separate labeled test set (all of dataset's normal samples
            then go to train/val)
        test_fraction: Per-class share reserved for testing when test_dataset
            is None, in (0, 1)

    Returns:
        OneClassSplit

    Raises:
        ClassNotFoundError: If normal_class does not occur
        AnomalyError: On unlabeled data, bad fractions or a degenerate test pool
    """
    if dataset.labels is None or (test_dataset is not None and test_dataset.labels is None):
        raise AnomalyError("One-class splits need labeled data")
    if not 0.0 < val_fraction < 1.0:
        raise AnomalyError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    if normal_class not in set(dataset.labels.tolist()):
        raise ClassNotFoundError(f"Normal class {normal_class} does not occur in {dataset.name}")

    rng = np.random.default_rng(seed)
    if test_dataset is None:
        if not 0.0 < test_fraction < 1.0:
            raise AnomalyError(f"test_fraction must lie in (0, 1), got {test_fraction}")
        reserved, kept = [], []
        for cls in np.unique(dataset.labels):
            members = rng.permutation(np.flatnonzero(dataset.labels == cls))
            n_test = _round_half_up(test_fraction * len(members))
            reserved.append(members[:n_test])
            kept.append(members[n_test:])
        pool = dataset.subset(np.sort(np.concatenate(reserved)))
        source = dataset.subset(np.sort(np.concatenate(kept)))
    else:
        pool, source = test_dataset, dataset

    pool_classes = np.unique(pool.labels)
    if normal_class not in set(pool_classes.tolist()) or len(pool_classes) < 2:
        raise ClassNotFoundError(
            f"Test pool must hold class {normal_class} and at least one other class"
        )

    normal = rng.permutation(np.flatnonzero(source.labels == normal_class))
    n_val = _round_half_up(val_fraction * len(normal))
    if n_val == 0 or n_val >= len(normal):
        raise AnomalyError(
            f"{len(normal)} normal samples cannot be split with val_fraction={val_fraction}"
        )
    val_idx, train_idx = normal[:n_val], normal[n_val:]

    test_idx = balanced_class_indices(pool.labels, rng)
    test_classes = pool.labels[test_idx]
    test = pool.subset(test_idx)

    prefix = f"{dataset.name}-c{normal_class}"
    split = OneClassSplit(
        normal_class=normal_class,
        train=_binary(source.subset(train_idx), np.zeros(len(train_idx)), f"{prefix}-train"),
        val=_binary(source.subset(val_idx), np.zeros(len(val_idx)), f"{prefix}-val"),
        test=_binary(test, (test_classes != normal_class).astype(np.int64), f"{prefix}-test"),
        test_classes=test_classes,
    )
    logger.info(
        f"One-class split for class {normal_class}: train {len(split.train)}, "
        f"val {len(split.val)}, test {len(split.test)} (anomaly rate {split.anomaly_rate:.2f})"
    )
    return split


def anomaly_score(model: EnsembleModel, x: np.ndarray) -> Union[float, np.ndarray]:
    """
    Reconstruction error of a fully trained model: the per-sample sum of
    squared differences between x and reconstruct(model, x).

    Args:
        model: Trained ensemble
        x: One sample (returns a float) or a batch (returns one score per sample)
    """
    if not model.is_trained:
        raise UntrainedModelError(f"Model has {model.trained_stages} of {model.M} stages trained")
    x = np.asarray(x, dtype=np.float64)
    if x.shape == tuple(model.encoder_spec.input_shape):
        return float(reconstruction_errors(model, model.M, x[np.newaxis])[0])
    return reconstruction_errors(model, model.M, x)


def eval_anomaly(
    model: EnsembleModel, split: OneClassSplit, seed: Optional[int] = None
) -> EvalReport:
    """
    Score the test set of a one-class split.

    The report holds the overall AUC (metric "auc", other_class unset), the AUC
    of the normal class against every single anomaly class (other_class set)
    and the mean score of normal and anomalous test samples.
    """
    scores = anomaly_score(model, split.test.samples)
    labels = split.test.labels
    report = EvalReport(kind="eval-anomaly")

    overall = auc(ScoredSet(scores=scores, labels=labels))
    report.add_metric("auc", overall, normal_class=split.normal_class, seed=seed)

    normal_mask = labels == 0
    for cls in np.unique(split.test_classes[~normal_mask]):
        mask = normal_mask | (split.test_classes == cls)
        value = auc(ScoredSet(scores=scores[mask], labels=labels[mask]))
        report.add_metric(
            "auc", value, normal_class=split.normal_class, other_class=int(cls), seed=seed
        )

    report.add_metric(
        "mean_score_normal", scores[normal_mask].mean(), normal_class=split.normal_class, seed=seed
    )
    report.add_metric(
        "mean_score_anomaly", scores[~normal_mask].mean(), normal_class=split.normal_class, seed=seed
    )
    logger.info(f"Normal class {split.normal_class}: AUC {overall:.4f}")
    return report
