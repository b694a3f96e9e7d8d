"""
Neural-Network Engine
=====================

Deterministic network instantiation, forward/backward passes, MSE loss and the
Adam update, built on the layer kernels in nn_core_layers.

Usage:
    from src.services.nn_core import NetworkSpec, init_network, forward, backward

    net = init_network(spec, scheme="scaled", seed=0)
    y, cache = forward(net, x)
    grads = backward(net, cache, mse_loss_grad(x, y))
    adam_step(net, grads, AdamConfig(learning_rate=3e-3))
"""

import copy
import logging
import uuid
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple

import numpy as np

from src.shared_utils.config import get_settings

from .nn_core_layers import LAYER_BACKWARD, LAYER_FORWARD, Params
from .nn_core_models import (
    AdamConfig,
    Conv2dSpec,
    DenseSpec,
    InitScheme,
    NetworkSpec,
    NonFiniteValueError,
    ShapeMismatchError,
    StaleCacheError,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Runtime containers
# =============================================================================


@dataclass
class AdamState:
    """First/second moment estimates per parameter tensor plus the step counter."""

    m: List[Params]
    v: List[Params]
    step: int = 0


@dataclass
class ForwardCache:
    """Per-layer intermediates of one forward pass, tied to a parameter version."""

    network_id: str
    version: int
    layer_caches: List[Any]
    batched: bool


@dataclass
class Gradients:
    """Per-layer parameter gradients plus the gradient w.r.t. the network input."""

    params: List[Params]
    input_grad: np.ndarray


@dataclass
class Network:
    """
    An instantiated NetworkSpec.

    Attributes:
        spec: The architecture
        params: One dict per layer (empty for parameterless layers) holding
            "weight" and "bias" arrays
        adam_state: Optimizer moments, same structure as params
        version: Incremented by every parameter update; caches from older
            versions are rejected by backward
    """

    spec: NetworkSpec
    params: List[Params]
    adam_state: AdamState
    network_id: str = field(default_factory=lambda: uuid.uuid4().hex)
    version: int = 0

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return self.spec.input_shape

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return self.spec.output_shape

    def clone(self) -> "Network":
        """Deep copy with a fresh identity."""
        twin = copy.deepcopy(self)
        twin.network_id = uuid.uuid4().hex
        return twin

    def parameter_arrays(self) -> List[np.ndarray]:
        """All parameter tensors in layer order, weight before bias."""
        return [p[name] for p in self.params for name in ("weight", "bias") if name in p]


# =============================================================================
# Initialization
# =============================================================================


def param_shapes(layer) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...], int]]:
    """(weight shape, bias shape, fan-in) of a parametric layer, None otherwise."""
    if isinstance(layer, DenseSpec):
        return (layer.out_units, layer.in_units), (layer.out_units,), layer.in_units
    if isinstance(layer, Conv2dSpec):
        shape = (layer.out_channels, layer.in_channels, layer.kernel, layer.kernel)
        return shape, (layer.out_channels,), layer.in_channels * layer.kernel**2
    return None


def init_network(spec: NetworkSpec, scheme: InitScheme = "paper_normal", seed: int = 0) -> Network:
    """
    Instantiate a network with freshly drawn parameters.

    Args:
        spec: Shape-consistent architecture
        scheme: "paper_normal" draws weights from N(0, 1); "scaled" draws from
            N(0, 2 / fan_in). Biases start at zero in both schemes.
        seed: Seed of the numpy Generator used for the draws

    Returns:
        Network with zeroed Adam state

    Example:
        >>> net = init_network(NetworkSpec(layers=[DenseSpec(in_units=3, out_units=2)],
        ...                                input_shape=(3,)), seed=1)
        >>> net.params[0]["weight"].shape
        (2, 3)
    """
    if scheme not in ("paper_normal", "scaled"):
        raise ValueError(f"Unknown init scheme '{scheme}'")

    rng = np.random.default_rng(seed)
    params: List[Params] = []
    for layer in spec.layers:
        shapes = param_shapes(layer)
        if shapes is None:
            params.append({})
            continue
        w_shape, b_shape, fan_in = shapes
        weight = rng.standard_normal(w_shape)
        if scheme == "scaled":
            weight *= np.sqrt(2.0 / fan_in)
        params.append({"weight": weight, "bias": np.zeros(b_shape)})

    adam = AdamState(
        m=[{k: np.zeros_like(a) for k, a in p.items()} for p in params],
        v=[{k: np.zeros_like(a) for k, a in p.items()} for p in params],
    )
    logger.debug(f"Initialized network ({len(spec.layers)} layers, scheme={scheme}, seed={seed})")
    return Network(spec=spec, params=params, adam_state=adam)


# =============================================================================
# Forward / backward
# =============================================================================


def _check_finite(what: str, arrays) -> None:
    if not get_settings().debug_finite_checks:
        return
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteValueError(f"Non-finite value in {what}")


def _as_batch(net: Network, x: np.ndarray) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    expected = tuple(net.input_shape)
    if x.shape == expected:
        return x[np.newaxis], False
    if x.ndim == len(expected) + 1 and x.shape[1:] == expected:
        return x, True
    raise ShapeMismatchError(f"Expected input shape {expected} (optionally batched), got {x.shape}")


def forward(net: Network, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Run x through every layer.

    Args:
        net: Network to evaluate
        x: One sample of the spec input shape, or a batch (N, *input_shape)

    Returns:
        Tuple of (output, cache); the output is batched exactly when x was

    Raises:
        ShapeMismatchError: If x does not match the spec input shape
    """
    h, batched = _as_batch(net, x)
    caches = []
    for layer, params in zip(net.spec.layers, net.params):
        h, layer_cache = LAYER_FORWARD[layer.kind](layer, params, h)
        caches.append(layer_cache)
    _check_finite("forward activations", [h])

    cache = ForwardCache(
        network_id=net.network_id, version=net.version, layer_caches=caches, batched=batched
    )
    return (h if batched else h[0]), cache


def predict(net: Network, x: np.ndarray) -> np.ndarray:
    """Forward pass without keeping the cache."""
    return forward(net, x)[0]


def backward(net: Network, cache: ForwardCache, loss_grad: np.ndarray) -> Gradients:
    """
    Backpropagate a loss gradient through the network.

    Args:
        net: The network the cache came from, unchanged since that forward pass
        cache: Cache returned by forward
        loss_grad: dLoss/dOutput, shaped like the forward output

    Returns:
        Gradients with per-layer parameter gradients and the input gradient, so a
        decoder's backward can be chained into an encoder's

    Raises:
        StaleCacheError: If the cache belongs to another network or an older
            parameter version
        ShapeMismatchError: If loss_grad does not match the forward output shape
    """
    if cache.network_id != net.network_id or cache.version != net.version:
        raise StaleCacheError(
            f"Cache (network {cache.network_id[:8]}, version {cache.version}) does not match "
            f"network {net.network_id[:8]} at version {net.version}"
        )

    grad = np.asarray(loss_grad, dtype=np.float64)
    if not cache.batched:
        grad = grad[np.newaxis]
    expected = tuple(net.output_shape)
    if grad.shape[1:] != expected:
        raise ShapeMismatchError(f"Loss gradient shape {grad.shape[1:]} != output {expected}")

    param_grads: List[Params] = [{} for _ in net.spec.layers]
    for idx in range(len(net.spec.layers) - 1, -1, -1):
        layer = net.spec.layers[idx]
        grad, layer_grads = LAYER_BACKWARD[layer.kind](
            layer, net.params[idx], cache.layer_caches[idx], grad
        )
        param_grads[idx] = layer_grads
    _check_finite("gradients", [grad] + [g for p in param_grads for g in p.values()])

    return Gradients(params=param_grads, input_grad=(grad if cache.batched else grad[0]))


# =============================================================================
# Loss
# =============================================================================


def mse_loss(x: np.ndarray, y: np.ndarray) -> float:
    """
    Mean squared error over every element (batch and features).

    Raises:
        ShapeMismatchError: If x and y differ in shape

    Example:
        >>> mse_loss(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
        1.0
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"MSE operands differ in shape: {x.shape} vs {y.shape}")
    return float(np.mean((x - y) ** 2))


def mse_loss_grad(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of mse_loss(x, y) with respect to the prediction y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"MSE operands differ in shape: {x.shape} vs {y.shape}")
    return 2.0 * (y - x) / x.size


# =============================================================================
# Adam
# =============================================================================


def adam_step(net: Network, grads: Gradients, config: AdamConfig) -> Network:
    """
    Apply one Adam update with bias correction, in place.

    Args:
        net: Network to update
        grads: Gradients from backward, shaped like net.params
        config: Optimizer hyperparameters

    Returns:
        The same network, with step counter and version incremented

    Raises:
        ShapeMismatchError: If a gradient tensor does not match its parameter
    """
    if len(grads.params) != len(net.params):
        raise ShapeMismatchError(
            f"Gradients cover {len(grads.params)} layers, network has {len(net.params)}"
        )
    for idx, (params, layer_grads) in enumerate(zip(net.params, grads.params)):
        for name, value in params.items():
            g = layer_grads.get(name)
            if g is None or g.shape != value.shape:
                got = None if g is None else g.shape
                raise ShapeMismatchError(
                    f"Gradient for layer {idx} '{name}' has shape {got}, expected {value.shape}"
                )

    state = net.adam_state
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t

    for idx, params in enumerate(net.params):
        for name, value in params.items():
            g = grads.params[idx][name]
            m = state.m[idx][name]
            v = state.v[idx][name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            m_hat = m / bias1
            v_hat = v / bias2
            value -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)

    net.version += 1
    _check_finite("parameters", net.parameter_arrays())
    return net
