"""
Run Configuration
=================

The declarative YAML run configuration. Every section has defaults; a preset
fills the architecture and the training schedule unless the file overrides
them. `resolve()` materializes every default so the echoed configuration
fully describes a run.

Example (train-boosted on synthetic bar images):

    seed: 3
    output_dir: outputs/bars
    dataset:
      kind: synth_images
      n: 2500
      fractions: [0.8, 0.2, 0.0]
    architecture:
      preset: desk-dense
    training:
      M: 5
      I: 200
"""

from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.shared_utils.config import get_settings
from src.services.nn_core import (
    ActivationSpec,
    AdamConfig,
    InitScheme,
    NetworkSpec,
    get_preset,
    mirror_decoder,
)

DESK_SCALE = {"M": 3, "I": 50, "Q": 16, "epochs": 2, "max_samples": 500}


class ConfigError(Exception):
    """Raised for run configurations that parse but cannot be executed."""

    pass


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetConfig(_Section):
    """
    Where samples come from.

    Kinds and their required fields:
        idx: images_path, labels_path (optional test_images_path, test_labels_path)
        cifar: paths (optional test_paths)
        csv: path (optional label_column, has_header)
        synth_images: n, classes, size, noise
        synth_blobs: n, classes, dim, spread
    """

    kind: Literal["idx", "cifar", "csv", "synth_images", "synth_blobs"] = "synth_images"
    images_path: Optional[Path] = None
    labels_path: Optional[Path] = None
    test_images_path: Optional[Path] = None
    test_labels_path: Optional[Path] = None
    paths: List[Path] = Field(default_factory=list)
    test_paths: List[Path] = Field(default_factory=list)
    path: Optional[Path] = None
    label_column: Optional[int] = Field(default=None, ge=0)
    has_header: bool = False
    normalize: bool = False

    n: int = Field(default=2000, ge=1)
    classes: int = Field(default=4, ge=1)
    size: int = Field(default=8, ge=4)
    noise: float = Field(default=0.05, ge=0.0)
    dim: int = Field(default=2, ge=1)
    spread: float = Field(default=1.0, ge=0.0)

    fractions: Tuple[float, float, float] = (0.8, 0.2, 0.0)
    max_samples: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_required_paths(self):
        required = {
            "idx": ("images_path", "labels_path"),
            "csv": ("path",),
        }.get(self.kind, ())
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"dataset.{name} is required for kind '{self.kind}'")
        if self.kind == "cifar" and not self.paths:
            raise ValueError("dataset.paths is required for kind 'cifar'")
        if (self.test_images_path is None) != (self.test_labels_path is None):
            raise ValueError("dataset.test_images_path and test_labels_path go together")
        return self

    def file_paths(self) -> List[Path]:
        """Every input file the dataset needs."""
        candidates = [
            self.images_path,
            self.labels_path,
            self.test_images_path,
            self.test_labels_path,
            self.path,
            *self.paths,
            *self.test_paths,
        ]
        return [p for p in candidates if p is not None]

    def under(self, root: Path) -> "DatasetConfig":
        """Copy with every relative input path placed under root, made absolute."""

        def rebase(path: Optional[Path]) -> Optional[Path]:
            if path is None or path.is_absolute():
                return path
            return (root / path).absolute()

        return self.model_copy(
            update={
                "images_path": rebase(self.images_path),
                "labels_path": rebase(self.labels_path),
                "test_images_path": rebase(self.test_images_path),
                "test_labels_path": rebase(self.test_labels_path),
                "path": rebase(self.path),
                "paths": [rebase(p) for p in self.paths],
                "test_paths": [rebase(p) for p in self.test_paths],
            }
        )

    def missing_files(self) -> List[Path]:
        return [p for p in self.file_paths() if not p.exists()]

    @property
    def has_test_set(self) -> bool:
        return self.test_images_path is not None or bool(self.test_paths)


class ArchitectureConfig(_Section):
    """
    Either a preset name or an explicit encoder (the decoder defaults to its mirror).
    """

    preset: Optional[str] = None
    encoder: Optional[NetworkSpec] = None
    decoder: Optional[NetworkSpec] = None
    hidden_activation: Optional[ActivationSpec] = None
    resolved_from: Optional[str] = Field(default=None, description="Preset of a resolved config")

    @model_validator(mode="after")
    def check_source(self):
        if self.preset is not None and self.encoder is not None:
            raise ValueError("architecture takes either preset or encoder, not both")
        if self.decoder is not None and self.encoder is None:
            raise ValueError("architecture.decoder requires architecture.encoder")
        if self.preset is not None:
            try:
                get_preset(self.preset)
            except KeyError as e:
                raise ValueError(str(e.args[0])) from e
        return self


class TrainingConfig(_Section):
    """Training schedule; unset fields come from the preset."""

    M: Optional[int] = Field(default=None, ge=1)
    I: Optional[int] = Field(default=None, ge=1)  # noqa: E741
    Q: Optional[int] = Field(default=None, ge=1)
    epochs: Optional[int] = Field(default=None, ge=0)
    batch_size: Optional[int] = Field(default=None, ge=1)
    learning_rate: Optional[float] = Field(default=None, gt=0.0)
    beta1: float = Field(default=0.9, gt=0.0, lt=1.0)
    beta2: float = Field(default=0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    init_scheme: Optional[InitScheme] = None
    validate_every: Optional[int] = Field(default=None, ge=1)

    def adam(self) -> AdamConfig:
        return AdamConfig(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
        )


class AnomalyConfig(_Section):
    normal_classes: List[int] = Field(default_factory=lambda: [0])
    val_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)


class ClusterConfig(_Section):
    k: Optional[int] = Field(default=None, ge=1)
    seeds: Optional[List[int]] = None
    init: Literal["kmeanspp", "random"] = "kmeanspp"
    max_iter: int = Field(default=300, ge=1)
    tol: float = Field(default=1e-8, ge=0.0)
    reducers: List[Literal["ensemble", "single-ae", "pca"]] = Field(
        default_factory=lambda: ["ensemble", "pca"]
    )
    pca_components: Optional[int] = Field(default=None, ge=1)
    pca_variance: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    single_model_path: Optional[Path] = None


class RunConfig(_Section):
    """Root of a run configuration file."""

    seed: int = 0
    output_dir: Optional[Path] = None
    desk_scale: bool = False
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    architecture: ArchitectureConfig = Field(
        default_factory=lambda: ArchitectureConfig(preset="desk-dense")
    )
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    anomaly: AnomalyConfig = Field(default_factory=AnomalyConfig)
    cluster: ClusterConfig = Field(default_factory=ClusterConfig)

    def networks(self) -> Tuple[NetworkSpec, NetworkSpec]:
        """Resolved (encoder, decoder) specs."""
        arch = self.architecture
        if arch.encoder is not None:
            decoder = arch.decoder or mirror_decoder(arch.encoder, arch.hidden_activation)
            return arch.encoder, decoder
        preset = get_preset(arch.preset or "desk-dense")
        return preset.encoder, mirror_decoder(
            preset.encoder, arch.hidden_activation or preset.hidden_activation
        )

    def resolve(self, default_output_dir: Path) -> "RunConfig":
        """
        Copy with every default materialized: preset hyperparameters, explicit
        decoder, output directory, dataset paths under the data directory and
        desk-scale limits. Training init_scheme falls back to Settings.init_scheme.
        """
        settings = get_settings()
        arch = self.architecture
        preset = None if arch.encoder is not None else get_preset(arch.preset or "desk-dense")
        encoder, decoder = self.networks()

        t = self.training

        def pick(value, fallback):
            return fallback if value is None else value

        training = t.model_copy(
            update={
                "M": pick(t.M, preset.num_encoders if preset else 5),
                "I": pick(t.I, preset.iterations if preset else 2000),
                "Q": pick(t.Q, preset.batch_size if preset else 50),
                "epochs": pick(t.epochs, preset.epochs if preset else 50),
                "batch_size": pick(t.batch_size, pick(t.Q, preset.batch_size if preset else 50)),
                "learning_rate": pick(t.learning_rate, preset.learning_rate if preset else 1e-3),
                "init_scheme": pick(t.init_scheme, settings.init_scheme),
            }
        )
        dataset = self.dataset.under(settings.data_directory)
        if self.desk_scale:
            training = training.model_copy(
                update={
                    "M": min(training.M, DESK_SCALE["M"]),
                    "I": min(training.I, DESK_SCALE["I"]),
                    "Q": min(training.Q, DESK_SCALE["Q"]),
                    "batch_size": min(training.batch_size, DESK_SCALE["Q"]),
                    "epochs": min(training.epochs, DESK_SCALE["epochs"]),
                }
            )
            limit = min(dataset.max_samples or DESK_SCALE["max_samples"], DESK_SCALE["max_samples"])
            dataset = dataset.model_copy(
                update={"max_samples": limit, "n": min(dataset.n, DESK_SCALE["max_samples"])}
            )

        return self.model_copy(
            update={
                "output_dir": self.output_dir or default_output_dir,
                "dataset": dataset,
                "training": training,
                "architecture": ArchitectureConfig(
                    encoder=encoder,
                    resolved_from=preset.name if preset else arch.resolved_from,
                    decoder=decoder,
                    hidden_activation=arch.hidden_activation
                    or (preset.hidden_activation if preset else None),
                ),
            }
        )


def load_run_config(path: Optional[Path]) -> RunConfig:
    """
    Parse a YAML run configuration; no path gives the default configuration.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigError: If the YAML is malformed or not a mapping
        pydantic.ValidationError: On invalid fields, naming each one
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML ({e})") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return RunConfig.model_validate(raw)


def format_validation_error(error: ValidationError) -> str:
    """One line per offending field, dotted location first."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{location}: {item['msg']}")
    return "\n".join(lines)
