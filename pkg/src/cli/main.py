"""
Boosted Autoencoder Ensembles CLI
=================================

Usage:
    bae train-boosted --config runs/bars.yaml --seed 3
    bae train-single --config runs/bars.yaml --desk-scale
    bae eval-anomaly --config runs/fmnist.yaml --model outputs/fmnist/model.bae
    bae eval-cluster --config runs/blobs.yaml --out outputs/blobs
    bae gradcheck

Exit codes: 0 success, 1 invalid configuration or missing input, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import ValidationError

from src.shared_utils.config import get_settings

from .cli_models import (
    ArchitectureConfig,
    ConfigError,
    RunConfig,
    format_validation_error,
    load_run_config,
)
from .cli_service import (
    cmd_eval_anomaly,
    cmd_eval_cluster,
    cmd_gradcheck,
    cmd_train_boosted,
    cmd_train_single,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2

COMMANDS = {
    "train-boosted": "Train a boosted autoencoder ensemble",
    "train-single": "Train the single-autoencoder baseline",
    "eval-anomaly": "One-class anomaly detection AUC",
    "eval-cluster": "K-means NMI in reduced spaces",
    "gradcheck": "Finite-difference check of every layer kind",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bae", description="Boosted autoencoder ensembles: training and evaluation"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--seed", type=int, default=None, help="Override the run seed")
        if name == "gradcheck":
            sub.add_argument(
                "--configurations", type=int, default=20, help="Random configurations per kind"
            )
            continue
        sub.add_argument("--config", type=Path, default=None, help="YAML run configuration")
        sub.add_argument("--out", type=Path, default=None, help="Output directory")
        sub.add_argument("--preset", default=None, help="Architecture preset name")
        sub.add_argument(
            "--desk-scale", action="store_true", help="Shrink the run to desk-scale limits"
        )
        if name.startswith("eval-"):
            sub.add_argument("--model", type=Path, default=None, help="Saved model.bae")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Apply command-line flags on top of the file configuration."""
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.out is not None:
        update["output_dir"] = args.out
    if args.desk_scale:
        update["desk_scale"] = True
    if args.preset is not None:
        update["architecture"] = ArchitectureConfig(preset=args.preset)
    return config.model_copy(update=update)


def run(args: argparse.Namespace) -> None:
    settings = get_settings()
    if args.command == "gradcheck":
        seed = settings.default_seed if args.seed is None else args.seed
        cmd_gradcheck(seed=seed, configurations=args.configurations)
        return

    config = apply_overrides(load_run_config(args.config), args)
    config = config.resolve(settings.output_directory / args.command)
    logger.info(f"{args.command}: output to {config.output_dir}")

    if args.command == "train-boosted":
        paths = cmd_train_boosted(config)
    elif args.command == "train-single":
        paths = cmd_train_single(config)
    elif args.command == "eval-anomaly":
        paths = cmd_eval_anomaly(config, args.model)
    else:
        paths = cmd_eval_cluster(config, args.model)

    for name, path in paths.items():
        print(f"{name}: {path}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=get_settings().log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        run(args)
    except ValidationError as e:
        logger.error(f"Invalid configuration:\n{format_validation_error(e)}")
        return EXIT_INVALID
    except (ConfigError, FileNotFoundError, yaml.YAMLError) as e:
        logger.error(str(e))
        return EXIT_INVALID
    except Exception as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
