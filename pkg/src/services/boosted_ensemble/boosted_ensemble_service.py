"""
Boosted Autoencoder Ensemble
============================

M encoders trained one after another against a single shared decoder. Stage m
samples training batches by the current sample weights, pushes them through
encoders 1..m, decodes their averaged latent code and updates only encoder m
and the decoder. After each stage the weights are reset proportional to every
training sample's reconstruction error under encoders 1..m.

Usage:
    from src.services.boosted_ensemble import BoostConfig, train_boosted, encode

    config = BoostConfig(M=5, I=2000, Q=50, seed=0)
    model, trace = train_boosted(encoder_spec, decoder_spec, train, val, config)
    latent = encode(model, x)
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from src.services.data_io import Dataset
from src.services.nn_core import (
    AdamConfig,
    InitScheme,
    Network,
    NetworkSpec,
    ShapeMismatchError,
    adam_step,
    backward,
    forward,
    init_network,
    mse_loss,
    mse_loss_grad,
    predict,
)
from src.shared_utils.config import get_settings

from .boosted_ensemble_helpers import (
    DECODER_STREAM,
    FIRST_ENCODER_STREAM,
    SAMPLER_STREAM,
    as_samples,
    init_sample_weights,
    iter_chunks,
    per_sample_squared_error,
    sample_batch,
    spawn_seeds,
    weights_from_errors,
)
from .boosted_ensemble_models import (
    BoostConfig,
    BoostedEnsembleError,
    SampleWeights,
    StageOrderError,
    TraceRow,
    TrainTrace,
    UntrainedModelError,
)

logger = logging.getLogger(__name__)

DataLike = Union[Dataset, np.ndarray]


# =============================================================================
# Model
# =============================================================================


def check_autoencoder_specs(encoder_spec: NetworkSpec, decoder_spec: NetworkSpec) -> None:
    """
    Raises:
        ShapeMismatchError: If the decoder does not map the latent shape back
            to the encoder input shape
    """
    if tuple(decoder_spec.input_shape) != tuple(encoder_spec.output_shape):
        raise ShapeMismatchError(
            f"Decoder input {decoder_spec.input_shape} != encoder output {encoder_spec.output_shape}"
        )
    if tuple(decoder_spec.output_shape) != tuple(encoder_spec.input_shape):
        raise ShapeMismatchError(
            f"Decoder output {decoder_spec.output_shape} != encoder input {encoder_spec.input_shape}"
        )


@dataclass(eq=False)
class EnsembleModel:
    """
    M encoders sharing one decoder.

    Attributes:
        encoders: The M encoder networks, all built from one NetworkSpec
        decoder: The shared decoder
        trained_stages: Number of stages completed, in [0, M]
    """

    encoders: List[Network]
    decoder: Network
    trained_stages: int = 0
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.encoders:
            raise BoostedEnsembleError("An ensemble needs at least one encoder")
        spec = self.encoders[0].spec
        if any(enc.spec != spec for enc in self.encoders[1:]):
            raise BoostedEnsembleError("All encoders must share one NetworkSpec")
        check_autoencoder_specs(spec, self.decoder.spec)
        if not 0 <= self.trained_stages <= len(self.encoders):
            raise StageOrderError(
                f"trained_stages={self.trained_stages} outside 0..{len(self.encoders)}"
            )

    @property
    def M(self) -> int:
        return len(self.encoders)

    @property
    def encoder_spec(self) -> NetworkSpec:
        return self.encoders[0].spec

    @property
    def decoder_spec(self) -> NetworkSpec:
        return self.decoder.spec

    @property
    def latent_shape(self) -> Tuple[int, ...]:
        return tuple(self.encoder_spec.output_shape)

    @property
    def is_trained(self) -> bool:
        return self.trained_stages == self.M


def as_ensemble(encoder: Network, decoder: Network, label: str = "single-ae") -> EnsembleModel:
    """Wrap a trained encoder/decoder pair as a fully trained one-encoder ensemble."""
    return EnsembleModel(encoders=[encoder], decoder=decoder, trained_stages=1, label=label)


# =============================================================================
# Inference
# =============================================================================


def _check_stage_index(model: EnsembleModel, m: int) -> None:
    if not 1 <= m <= model.M:
        raise StageOrderError(f"Stage index m={m} outside 1..{model.M}")


def average_encoding(model: EnsembleModel, m: int, x: np.ndarray) -> np.ndarray:
    """
    Mean of the outputs of encoders 1..m.

    Encoder outputs are accumulated in index order before dividing by m.

    Args:
        model: The ensemble
        m: Number of leading encoders to average
        x: One sample or a batch

    Returns:
        Latent code with the single-encoder latent shape (batched when x is)
    """
    _check_stage_index(model, m)
    total = np.array(predict(model.encoders[0], x), dtype=np.float64)
    for encoder in model.encoders[1:m]:
        total += predict(encoder, x)
    return total / m


def _reconstruct_upto(model: EnsembleModel, m: int, x: np.ndarray) -> np.ndarray:
    return predict(model.decoder, average_encoding(model, m, x))


def _require_trained(model: EnsembleModel) -> None:
    if not model.is_trained:
        raise UntrainedModelError(
            f"Model has {model.trained_stages} of {model.M} stages trained"
        )


def encode(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Latent code of a fully trained ensemble: the average over all M encoders."""
    _require_trained(model)
    return average_encoding(model, model.M, x)


def reconstruct(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Decoder applied to encode(model, x); shaped like x."""
    _require_trained(model)
    return _reconstruct_upto(model, model.M, x)


def reconstruction_errors(
    model: EnsembleModel, m: int, data: DataLike, chunk_size: Optional[int] = None
) -> np.ndarray:
    """
    Per-sample sum of squared reconstruction errors using encoders 1..m.

    This is both the boosting weight signal and the anomaly score.
    """
    x = as_samples(data)
    if tuple(x.shape[1:]) != tuple(model.encoder_spec.input_shape):
        raise ShapeMismatchError(
            f"Samples of shape {x.shape[1:]} do not match encoder input "
            f"{model.encoder_spec.input_shape}"
        )
    chunk_size = chunk_size or get_settings().eval_batch_size
    errors = np.empty(len(x))
    for chunk in iter_chunks(len(x), chunk_size):
        errors[chunk] = per_sample_squared_error(x[chunk], _reconstruct_upto(model, m, x[chunk]))
    return errors


def validation_mse(model: EnsembleModel, m: int, data: DataLike) -> float:
    """Mean squared error over every element of data, using encoders 1..m."""
    x = as_samples(data)
    return float(reconstruction_errors(model, m, x).sum() / x.size)


# =============================================================================
# Training
# =============================================================================


def _frozen_latent_sum(model: EnsembleModel, m: int, x: np.ndarray) -> Optional[np.ndarray]:
    """Sum of encoders 1..m-1 over all training samples (None for m == 1)."""
    if m == 1:
        return None
    chunk_size = get_settings().eval_batch_size
    total = np.empty((len(x),) + model.latent_shape)
    for chunk in iter_chunks(len(x), chunk_size):
        acc = np.array(predict(model.encoders[0], x[chunk]), dtype=np.float64)
        for encoder in model.encoders[1 : m - 1]:
            acc += predict(encoder, x[chunk])
        total[chunk] = acc
    return total


def _autoencoder_step(
    encoder: Network,
    decoder: Network,
    xb: np.ndarray,
    adam: AdamConfig,
    frozen_sum: Optional[np.ndarray] = None,
    divisor: int = 1,
) -> float:
    """
    One update of encoder and decoder on a batch; returns the pre-update batch MSE.

    With frozen_sum the latent code is (frozen_sum + encoder(xb)) / divisor, so
    the gradient reaching the encoder is the decoder input gradient over divisor.
    """
    h, enc_cache = forward(encoder, xb)
    latent = h if frozen_sum is None else frozen_sum + h
    if divisor != 1:
        latent = latent / divisor
    y, dec_cache = forward(decoder, latent)

    loss = mse_loss(xb, y)
    dec_grads = backward(decoder, dec_cache, mse_loss_grad(xb, y))
    enc_grads = backward(encoder, enc_cache, dec_grads.input_grad / divisor)
    adam_step(decoder, dec_grads, adam)
    adam_step(encoder, enc_grads, adam)
    return loss


def train_stage(
    model: EnsembleModel,
    m: int,
    data: DataLike,
    weights: SampleWeights,
    config: BoostConfig,
    rng: np.random.Generator,
    val_data: Optional[DataLike] = None,
    samples_seen: int = 0,
) -> Tuple[EnsembleModel, TrainTrace]:
    """
    Train encoder m and the shared decoder for config.I iterations.

    Encoders 1..m-1 are never touched. The decoder keeps its parameters and
    optimizer state from earlier stages.

    Args:
        model: Ensemble with exactly m-1 trained stages; updated in place
        m: Stage index, 1-based
        data: Training samples
        weights: Sampling distribution over data
        config: Run hyperparameters
        rng: Batch sampler Generator
        val_data: Optional validation samples for periodic validation MSE
        samples_seen: Sample presentations before this stage, for the trace

    Returns:
        Tuple of (model, trace rows of this stage)

    Raises:
        StageOrderError: If m is not trained_stages + 1
    """
    if m != model.trained_stages + 1 or m > model.M:
        raise StageOrderError(
            f"Cannot train stage {m}: {model.trained_stages} of {model.M} stages trained"
        )
    x = as_samples(data)
    if len(weights) != len(x):
        raise ShapeMismatchError(f"{len(weights)} weights for {len(x)} samples")

    validate_every = config.validate_every or get_settings().validate_every
    encoder = model.encoders[m - 1]
    frozen = _frozen_latent_sum(model, m, x)
    trace = TrainTrace()

    logger.info(f"Stage {m}/{model.M}: {config.I} iterations of batch {config.Q}")
    for it in range(1, config.I + 1):
        idx = sample_batch(weights, config.Q, rng)
        loss = _autoencoder_step(
            encoder,
            model.decoder,
            x[idx],
            config.adam,
            frozen_sum=None if frozen is None else frozen[idx],
            divisor=m,
        )
        samples_seen += config.Q

        val = None
        if val_data is not None and (it % validate_every == 0 or it == config.I):
            val = validation_mse(model, m, val_data)
            logger.debug(f"Stage {m} iteration {it}: train {loss:.6f}, val {val:.6f}")
        trace.append(
            TraceRow(stage=m, iteration=it, samples_seen=samples_seen, train_mse=loss, val_mse=val)
        )

    model.trained_stages = m
    if trace.final_val_mse is not None:
        logger.info(f"Stage {m} done: validation MSE {trace.final_val_mse:.6f}")
    return model, trace


def update_sample_weights(model: EnsembleModel, m: int, data: DataLike) -> SampleWeights:
    """
    Weights proportional to each training sample's reconstruction error under
    encoders 1..m, over the full training set.

    Raises:
        StageOrderError: If stage m is not trained yet
    """
    _check_stage_index(model, m)
    if m > model.trained_stages:
        raise StageOrderError(f"Stage {m} is not trained ({model.trained_stages} trained)")
    weights = weights_from_errors(reconstruction_errors(model, m, data))
    logger.debug(f"Stage {m} weights: max {weights.w.max():.3e}, min {weights.w.min():.3e}")
    return weights


def init_ensemble(
    encoder_spec: NetworkSpec,
    decoder_spec: NetworkSpec,
    M: int,
    seed: int = 0,
    scheme: InitScheme = "paper_normal",
) -> EnsembleModel:
    """Fresh untrained ensemble; network seeds derive from `seed` as in train_boosted."""
    check_autoencoder_specs(encoder_spec, decoder_spec)
    seeds = spawn_seeds(seed, FIRST_ENCODER_STREAM + M)
    decoder = init_network(decoder_spec, scheme=scheme, seed=seeds[DECODER_STREAM])
    encoders = [
        init_network(encoder_spec, scheme=scheme, seed=seeds[FIRST_ENCODER_STREAM + j])
        for j in range(M)
    ]
    return EnsembleModel(encoders=encoders, decoder=decoder)


def _check_data(encoder_spec: NetworkSpec, x: np.ndarray, what: str) -> None:
    if len(x) == 0:
        raise BoostedEnsembleError(f"{what} data is empty")
    if tuple(x.shape[1:]) != tuple(encoder_spec.input_shape):
        raise ShapeMismatchError(
            f"{what} samples of shape {x.shape[1:]} do not match encoder input "
            f"{encoder_spec.input_shape}"
        )


def train_boosted(
    encoder_spec: NetworkSpec,
    decoder_spec: NetworkSpec,
    data: DataLike,
    val_data: Optional[DataLike],
    config: BoostConfig,
) -> Tuple[EnsembleModel, TrainTrace]:
    """
    Train a boosted autoencoder ensemble stage by stage.

    Args:
        encoder_spec: Architecture of every encoder
        decoder_spec: Architecture of the shared decoder
        data: Training samples scaled to [0, 1]
        val_data: Optional validation samples
        config: Run hyperparameters

    Returns:
        Tuple of (fully trained model, trace over all stages)

    Example:
        >>> model, trace = train_boosted(enc, dec, train, val, BoostConfig(M=3, I=50, Q=16))
        >>> model.trained_stages
        3
    """
    x = as_samples(data)
    _check_data(encoder_spec, x, "Training")
    if val_data is not None:
        _check_data(encoder_spec, as_samples(val_data), "Validation")

    model = init_ensemble(encoder_spec, decoder_spec, config.M, config.seed, config.init_scheme)
    rng = np.random.default_rng(spawn_seeds(config.seed, FIRST_ENCODER_STREAM)[SAMPLER_STREAM])
    weights = init_sample_weights(len(x))
    trace = TrainTrace()

    logger.info(
        f"Boosted training: M={config.M}, I={config.I}, Q={config.Q}, n={len(x)}, "
        f"seed={config.seed}"
    )
    for m in range(1, config.M + 1):
        samples_seen = trace.rows[-1].samples_seen if trace.rows else 0
        model, stage_trace = train_stage(
            model, m, x, weights, config, rng, val_data=val_data, samples_seen=samples_seen
        )
        trace.extend(stage_trace)
        weights = update_sample_weights(model, m, x)

    return model, trace


def train_single_ae(
    encoder_spec: NetworkSpec,
    decoder_spec: NetworkSpec,
    data: DataLike,
    val_data: Optional[DataLike],
    epochs: int,
    batch_size: int,
    adam: Optional[AdamConfig] = None,
    seed: int = 0,
    init_scheme: InitScheme = "paper_normal",
    validate_every: Optional[int] = None,
) -> Tuple[Tuple[Network, Network], TrainTrace]:
    """
    Plain epoch-based autoencoder training with uniform shuffling.

    Networks and the shuffler draw from the same seed streams as a boosted run
    with one encoder, so both start from identical parameters.

    Args:
        encoder_spec: Encoder architecture
        decoder_spec: Decoder architecture
        data: Training samples
        val_data: Optional validation samples, evaluated every validate_every
            batches and at the end of every epoch
        epochs: Passes over the data (0 leaves the networks at initialization)
        batch_size: Samples per batch; the last batch of an epoch may be smaller
        adam: Optimizer settings
        seed: Root seed
        init_scheme: Weight initialization scheme

    Returns:
        Tuple of ((encoder, decoder), trace) with one trace stage per epoch
    """
    if epochs < 0 or batch_size < 1:
        raise ValueError(f"Invalid epochs={epochs} or batch_size={batch_size}")
    x = as_samples(data)
    _check_data(encoder_spec, x, "Training")
    adam = adam or AdamConfig()
    validate_every = validate_every or get_settings().validate_every

    model = init_ensemble(encoder_spec, decoder_spec, 1, seed, init_scheme)
    encoder, decoder = model.encoders[0], model.decoder
    rng = np.random.default_rng(spawn_seeds(seed, FIRST_ENCODER_STREAM)[SAMPLER_STREAM])
    trace = TrainTrace()
    samples_seen = 0
    step = 0

    logger.info(f"Single AE training: {epochs} epochs, batch {batch_size}, n={len(x)}")
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(x))
        batches = list(iter_chunks(len(x), batch_size))
        for b, chunk in enumerate(batches, start=1):
            xb = x[order[chunk]]
            loss = _autoencoder_step(encoder, decoder, xb, adam)
            samples_seen += len(xb)
            step += 1

            val = None
            if val_data is not None and (step % validate_every == 0 or b == len(batches)):
                val = _pair_validation_mse(encoder, decoder, val_data)
            trace.append(
                TraceRow(
                    stage=epoch, iteration=b, samples_seen=samples_seen, train_mse=loss, val_mse=val
                )
            )
        if trace.final_val_mse is not None:
            logger.info(f"Epoch {epoch}/{epochs}: validation MSE {trace.final_val_mse:.6f}")

    return (encoder, decoder), trace


def _pair_validation_mse(encoder: Network, decoder: Network, val_data: DataLike) -> float:
    return validation_mse(as_ensemble(encoder, decoder), 1, val_data)
