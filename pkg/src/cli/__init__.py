"""
Command Line Package
====================

Declarative run configuration and the `bae` command-line entry point.

Usage:
    from src.cli import main

    exit_code = main(["train-boosted", "--config", "runs/bars.yaml"])
"""

from .cli_models import (
    ConfigError,
    DatasetConfig,
    ArchitectureConfig,
    TrainingConfig,
    AnomalyConfig,
    ClusterConfig,
    RunConfig,
    DESK_SCALE,
    load_run_config,
    format_validation_error,
)
from .cli_service import (
    load_dataset,
    check_input_shape,
    cmd_train_boosted,
    cmd_train_single,
    cmd_eval_anomaly,
    cmd_eval_cluster,
    cmd_gradcheck,
)
from .main import main, build_parser

__all__ = [
    "ConfigError",
    "DatasetConfig",
    "ArchitectureConfig",
    "TrainingConfig",
    "AnomalyConfig",
    "ClusterConfig",
    "RunConfig",
    "DESK_SCALE",
    "load_run_config",
    "format_validation_error",
    "load_dataset",
    "check_input_shape",
    "cmd_train_boosted",
    "cmd_train_single",
    "cmd_eval_anomaly",
    "cmd_eval_cluster",
    "cmd_gradcheck",
    "main",
    "build_parser",
]
