"""
CLI Commands
============

One function per subcommand. Each takes a resolved RunConfig, writes its
artifacts under the configured output directory and returns the written paths.

Usage:
    from src.cli.cli_models import load_run_config
    from src.cli.cli_service import cmd_train_boosted

    config = load_run_config("runs/bars.yaml").resolve(Path("outputs"))
    paths = cmd_train_boosted(config)
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import polars as pl

from src.services.anomaly import build_one_class_split, eval_anomaly
from src.services.boosted_ensemble import (
    BoostConfig,
    EnsembleModel,
    as_ensemble,
    spawn_seeds,
    train_boosted,
    train_single_ae,
    validation_mse,
)
from src.services.clustering import (
    EnsembleReducer,
    PCAReducer,
    Reducer,
    SingleAEReducer,
    eval_clustering,
)
from src.services.data_io import (
    Dataset,
    load_cifar_binary,
    load_csv,
    load_idx,
    minmax_bounds,
    normalize_minmax,
    split,
    synth_blobs,
    synth_images,
)
from src.services.nn_core import GradcheckFailedError, NetworkSpec, gradcheck
from src.services.persistence import MODEL_FILE, EvalReport, emit_report, load_model, save_model

from .cli_models import ConfigError, DatasetConfig, RunConfig

logger = logging.getLogger(__name__)


# =============================================================================
# Inputs
# =============================================================================


def _limit(dataset: Dataset, max_samples: Optional[int], seed: int) -> Dataset:
    if max_samples is None or len(dataset) <= max_samples:
        return dataset
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.permutation(len(dataset))[:max_samples])
    logger.info(f"Keeping {max_samples} of {len(dataset)} samples of {dataset.name}")
    return dataset.subset(keep)


def load_dataset(config: DatasetConfig, seed: int = 0) -> Tuple[Dataset, Optional[Dataset]]:
    """
    Load the dataset a run configuration describes.

    Every input file is checked before anything is read. max_samples applies
    to the training pool and the test set alike. normalize fits its min-max
    bounds on the training pool and rescales the test set with them.

    Returns:
        Tuple of (dataset, separate test set or None)

    Raises:
        FileNotFoundError: Naming every missing input file
    """
    missing = config.missing_files()
    if missing:
        raise FileNotFoundError("Missing input files: " + ", ".join(str(p) for p in missing))

    test = None
    if config.kind == "idx":
        dataset = load_idx(config.images_path, config.labels_path)
        if config.test_images_path is not None:
            test = load_idx(config.test_images_path, config.test_labels_path)
    elif config.kind == "cifar":
        dataset = load_cifar_binary(config.paths)
        if config.test_paths:
            test = load_cifar_binary(config.test_paths, name="cifar10-test")
    elif config.kind == "csv":
        dataset = load_csv(config.path, config.label_column, config.has_header)
    elif config.kind == "synth_images":
        dataset = synth_images(
            config.n,
            pattern_classes=config.classes,
            size=config.size,
            noise=config.noise,
            seed=seed,
        )
    else:
        dataset = synth_blobs(config.n, config.classes, config.dim, config.spread, seed=seed)

    limit_seed, test_seed = spawn_seeds(seed, 2)
    dataset = _limit(dataset, config.max_samples, limit_seed)
    if test is not None:
        test = _limit(test, config.max_samples, test_seed)
    if config.normalize:
        bounds = minmax_bounds(dataset)
        dataset = normalize_minmax(dataset, bounds)
        test = normalize_minmax(test, bounds) if test is not None else None
    return dataset, test


def check_input_shape(dataset: Dataset, encoder: NetworkSpec) -> None:
    """Raise ConfigError unless the samples fit the encoder input."""
    if tuple(dataset.sample_shape) != tuple(encoder.input_shape):
        raise ConfigError(
            f"Dataset {dataset.name} has samples of shape {tuple(dataset.sample_shape)} but the "
            f"encoder expects {tuple(encoder.input_shape)}"
        )


def _boost_config(config: RunConfig) -> BoostConfig:
    t = config.training
    return BoostConfig(
        M=t.M,
        I=t.I,
        Q=t.Q,
        adam=t.adam(),
        seed=config.seed,
        init_scheme=t.init_scheme,
        validate_every=t.validate_every,
    )


def _new_report(kind: str, config: RunConfig) -> EvalReport:
    report = EvalReport(kind=kind, config=config.model_dump(mode="json"))
    preset = config.architecture.resolved_from
    if preset:
        report.notes.append(f"architecture preset: {preset}")
    return report


def _output_dir(config: RunConfig) -> Path:
    if config.output_dir is None:
        raise ConfigError("output_dir is not set; resolve the configuration first")
    return Path(config.output_dir)


def _optional(dataset: Dataset) -> Optional[Dataset]:
    return dataset if len(dataset) else None


# =============================================================================
# Training
# =============================================================================


def _fit_boosted(
    config: RunConfig, train: Dataset, val: Optional[Dataset]
) -> Tuple[EnsembleModel, EvalReport]:
    encoder, decoder = config.networks()
    model, trace = train_boosted(encoder, decoder, train, val, _boost_config(config))
    report = _new_report("train-boosted", config)
    report.trace = list(trace.rows)
    if val is not None:
        for m in range(1, model.M + 1):
            report.add_metric("val_mse", validation_mse(model, m, val), stage=m, seed=config.seed)
    return model, report


def _fit_single(
    config: RunConfig, train: Dataset, val: Optional[Dataset]
) -> Tuple[EnsembleModel, EvalReport]:
    encoder_spec, decoder_spec = config.networks()
    t = config.training
    (encoder, decoder), trace = train_single_ae(
        encoder_spec,
        decoder_spec,
        train,
        val,
        epochs=t.epochs,
        batch_size=t.batch_size,
        adam=t.adam(),
        seed=config.seed,
        init_scheme=t.init_scheme,
        validate_every=t.validate_every,
    )
    model = as_ensemble(encoder, decoder)
    report = _new_report("train-single", config)
    report.trace = list(trace.rows)
    if val is not None:
        report.add_metric("val_mse", validation_mse(model, 1, val), stage=1, seed=config.seed)
    return model, report


def _train(config: RunConfig, single: bool) -> Dict[str, Path]:
    encoder, _ = config.networks()
    dataset, _ = load_dataset(config.dataset, config.seed)
    check_input_shape(dataset, encoder)
    train, val, _ = split(dataset, config.dataset.fractions, seed=config.seed)

    fit = _fit_single if single else _fit_boosted
    model, report = fit(config, train, _optional(val))

    out = _output_dir(config)
    paths = emit_report(report, out)
    paths[MODEL_FILE] = save_model(model, out / MODEL_FILE)
    return paths


def cmd_train_boosted(config: RunConfig) -> Dict[str, Path]:
    """Train a boosted ensemble; write model.bae and its training report."""
    return _train(config, single=False)


def cmd_train_single(config: RunConfig) -> Dict[str, Path]:
    """Train the single-autoencoder baseline; write model.bae and its report."""
    return _train(config, single=True)


# =============================================================================
# Evaluation
# =============================================================================


def _load_checked(path: Path, config: RunConfig) -> EnsembleModel:
    encoder, decoder = config.networks()
    return load_model(path, expected_encoder_spec=encoder, expected_decoder_spec=decoder)


def cmd_eval_anomaly(config: RunConfig, model_path: Optional[Path] = None) -> Dict[str, Path]:
    """
    One-class anomaly detection for every configured normal class.

    With model_path the saved model is scored (one normal class only);
    otherwise a boosted ensemble is trained per normal class on that class's
    training split and saved next to the report.
    """
    normal_classes = config.anomaly.normal_classes
    if model_path is not None and len(normal_classes) != 1:
        raise ConfigError(
            f"--model scores one normal class, configuration lists {len(normal_classes)}"
        )
    encoder, _ = config.networks()
    dataset, test = load_dataset(config.dataset, config.seed)
    check_input_shape(dataset, encoder)
    if test is not None:
        check_input_shape(test, encoder)

    out = _output_dir(config)
    report = _new_report("eval-anomaly", config)
    paths: Dict[str, Path] = {}
    for normal_class in normal_classes:
        one_class = build_one_class_split(
            dataset,
            normal_class,
            val_fraction=config.anomaly.val_fraction,
            seed=config.seed,
            test_dataset=test,
            test_fraction=config.anomaly.test_fraction,
        )
        if model_path is not None:
            model = _load_checked(Path(model_path), config)
            report.notes.append(f"model: {model_path}")
        else:
            model, trained = _fit_boosted(config, one_class.train, one_class.val)
            report.metrics.extend(
                r.model_copy(update={"normal_class": normal_class}) for r in trained.metrics
            )
            model_file = out / f"class_{normal_class}" / MODEL_FILE
            paths[str(model_file.relative_to(out))] = save_model(model, model_file)
        report.merge(eval_anomaly(model, one_class, seed=config.seed))

    paths.update(emit_report(report, out))
    return paths


def _cluster_reducers(
    config: RunConfig, dataset: Dataset, model_path: Optional[Path]
) -> List[Reducer]:
    encoder, _ = config.networks()
    cluster = config.cluster
    reducers: List[Reducer] = []
    for name in cluster.reducers:
        if name == "ensemble":
            if model_path is not None:
                model = _load_checked(Path(model_path), config)
            else:
                model, _ = _fit_boosted(config, dataset, None)
            reducers.append(EnsembleReducer(model))
        elif name == "single-ae":
            if cluster.single_model_path is not None:
                model = _load_checked(cluster.single_model_path, config)
            else:
                model, _ = _fit_single(config, dataset, None)
            reducers.append(SingleAEReducer(model))
        else:
            components = cluster.pca_components
            if components is None and cluster.pca_variance is None:
                components = int(np.prod(encoder.output_shape))
            reducers.append(PCAReducer(components, cluster.pca_variance))
    return reducers


def cmd_eval_cluster(config: RunConfig, model_path: Optional[Path] = None) -> Dict[str, Path]:
    """
    Cluster the dataset in every configured reduced space and score with NMI.

    Autoencoder reducers come from saved models when given, otherwise they are
    trained on the whole dataset without labels. PCA defaults to as many
    components as the encoder's latent size.
    """
    encoder, _ = config.networks()
    dataset, _ = load_dataset(config.dataset, config.seed)
    check_input_shape(dataset, encoder)
    if dataset.labels is None:
        raise ConfigError(f"Dataset {dataset.name} has no labels to score clusters against")

    cluster = config.cluster
    k = cluster.k or dataset.num_classes or len(np.unique(dataset.labels))
    reducers = _cluster_reducers(config, dataset, model_path)
    scored = eval_clustering(
        reducers,
        dataset.samples,
        dataset.labels,
        k,
        seeds=cluster.seeds,
        init=cluster.init,
        max_iter=cluster.max_iter,
        tol=cluster.tol,
    )
    report = _new_report("eval-cluster", config)
    report.merge(scored)
    report.config["protocol"] = scored.config
    return emit_report(report, _output_dir(config))


# =============================================================================
# Verification
# =============================================================================


def cmd_gradcheck(seed: int = 0, configurations: int = 20) -> pl.DataFrame:
    """
    Finite-difference check of every layer kind.

    Prints one row per layer kind and returns the table.

    Raises:
        GradcheckFailedError: After printing, if any configuration failed
    """
    records = gradcheck(configurations=configurations, seed=seed)
    table = (
        pl.DataFrame([r.model_dump() for r in records])
        .group_by("layer_kind", maintain_order=True)
        .agg(
            pl.len().alias("configurations"),
            pl.col("passed").all().alias("passed"),
            pl.col("max_param_rel_error").max(),
            pl.col("max_input_rel_error").max(),
        )
    )
    print(table)
    failed = table.filter(~pl.col("passed"))["layer_kind"].to_list()
    if failed:
        raise GradcheckFailedError(f"Gradcheck failed for: {', '.join(failed)}")
    return table
