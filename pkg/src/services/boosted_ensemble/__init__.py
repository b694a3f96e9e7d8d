"""
Boosted Autoencoder Ensemble
============================

Sequentially trained encoders sharing one continuously trained decoder, with
reconstruction-error-weighted resampling between stages, plus the single
autoencoder baseline.

Usage:
    from src.services.boosted_ensemble import BoostConfig, train_boosted, reconstruct

    model, trace = train_boosted(encoder_spec, decoder_spec, train, val,
                                 BoostConfig(M=3, I=50, Q=16, seed=0))
    x_hat = reconstruct(model, val.samples)
"""

from .boosted_ensemble_models import (
    BoostedEnsembleError,
    StageOrderError,
    InvalidSampleWeightsError,
    UntrainedModelError,
    BoostConfig,
    SampleWeights,
    TraceRow,
    TrainTrace,
)
from .boosted_ensemble_helpers import (
    init_sample_weights,
    sample_batch,
    per_sample_squared_error,
    weights_from_errors,
    spawn_seeds,
)
from .boosted_ensemble_service import (
    EnsembleModel,
    as_ensemble,
    check_autoencoder_specs,
    average_encoding,
    encode,
    reconstruct,
    reconstruction_errors,
    validation_mse,
    init_ensemble,
    train_stage,
    update_sample_weights,
    train_boosted,
    train_single_ae,
)

__all__ = [
    "BoostedEnsembleError",
    "StageOrderError",
    "InvalidSampleWeightsError",
    "UntrainedModelError",
    "BoostConfig",
    "SampleWeights",
    "TraceRow",
    "TrainTrace",
    "init_sample_weights",
    "sample_batch",
    "per_sample_squared_error",
    "weights_from_errors",
    "spawn_seeds",
    "EnsembleModel",
    "as_ensemble",
    "check_autoencoder_specs",
    "average_encoding",
    "encode",
    "reconstruct",
    "reconstruction_errors",
    "validation_mse",
    "init_ensemble",
    "train_stage",
    "update_sample_weights",
    "train_boosted",
    "train_single_ae",
]
