"""
Finite-Difference Gradient Check
================================

Compares backprop gradients with central finite differences for every layer
kind, on small random configurations.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from .nn_core_models import (
    ActivationSpec,
    Conv2dSpec,
    DenseSpec,
    FlattenSpec,
    GradcheckFailedError,
    GradcheckRecord,
    MaxPool2x2Spec,
    NetworkSpec,
    ReshapeSpec,
    Upsample2x2Spec,
)
from .nn_core_service import Network, backward, forward, init_network

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
REL_TOLERANCE = 1e-4


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max|a − n| / max(max|a|, max|n|), 0 when both vanish."""
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)))
    if scale < 1e-12:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / scale)


def _loss(net: Network, x: np.ndarray, probe: np.ndarray) -> float:
    # linear probe keeps dL/dy = probe
    return float(np.sum(forward(net, x)[0] * probe))


def numeric_gradients(
    net: Network, x: np.ndarray, probe: np.ndarray, step: float = FD_STEP
) -> Tuple[List[dict], np.ndarray]:
    """Central-difference gradients of sum(forward(x) · probe) w.r.t. params and x."""
    param_grads = []
    for params in net.params:
        layer_grads = {}
        for name, value in params.items():
            grad = np.zeros_like(value)
            it = np.nditer(value, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                original = value[idx]
                value[idx] = original + step
                plus = _loss(net, x, probe)
                value[idx] = original - step
                minus = _loss(net, x, probe)
                value[idx] = original
                grad[idx] = (plus - minus) / (2 * step)
            layer_grads[name] = grad
        param_grads.append(layer_grads)

    x = x.copy()
    input_grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        original = x[idx]
        x[idx] = original + step
        plus = _loss(net, x, probe)
        x[idx] = original - step
        minus = _loss(net, x, probe)
        x[idx] = original
        input_grad[idx] = (plus - minus) / (2 * step)
    return param_grads, input_grad


def check_network(
    net: Network, x: np.ndarray, probe: np.ndarray, layer_kind: str, description: str
) -> GradcheckRecord:
    """Gradcheck one network on one batch."""
    _, cache = forward(net, x)
    analytic = backward(net, cache, probe)
    numeric_params, numeric_input = numeric_gradients(net, x, probe)

    param_err = 0.0
    for a_layer, n_layer in zip(analytic.params, numeric_params):
        for name, n_grad in n_layer.items():
            param_err = max(param_err, relative_error(a_layer[name], n_grad))
    input_err = relative_error(analytic.input_grad, numeric_input)

    return GradcheckRecord(
        layer_kind=layer_kind,
        description=description,
        max_param_rel_error=param_err,
        max_input_rel_error=input_err,
        passed=param_err < REL_TOLERANCE and input_err < REL_TOLERANCE,
    )


def _random_case(rng: np.random.Generator, kind: str) -> Tuple[NetworkSpec, str]:
    """A single-layer network of the given kind with random small shapes."""
    if kind == "dense":
        i, o = (int(v) for v in rng.integers(1, 5, size=2))
        return NetworkSpec(layers=[DenseSpec(in_units=i, out_units=o)], input_shape=(i,)), (
            f"dense({i},{o})"
        )
    if kind == "conv2d":
        c, o = (int(v) for v in rng.integers(1, 3, size=2))
        k = int(rng.integers(1, 4))
        s = int(rng.integers(1, 3))
        p = int(rng.integers(0, 2))
        size = int(rng.integers(max(k, 3), 7))
        layer = Conv2dSpec(in_channels=c, out_channels=o, kernel=k, stride=s, padding=p)
        return NetworkSpec(layers=[layer], input_shape=(c, size, size)), (
            f"conv2d({c},{o},{k},{s},{p}) on {size}x{size}"
        )
    if kind == "maxpool2x2":
        c = int(rng.integers(1, 3))
        h, w = (int(v) for v in rng.integers(2, 6, size=2))
        return NetworkSpec(layers=[MaxPool2x2Spec()], input_shape=(c, h, w)), (
            f"maxpool2x2 on {c}x{h}x{w}"
        )
    if kind == "upsample2x2":
        c = int(rng.integers(1, 3))
        h, w = (int(v) for v in rng.integers(1, 4, size=2))
        return NetworkSpec(layers=[Upsample2x2Spec()], input_shape=(c, h, w)), (
            f"upsample2x2 on {c}x{h}x{w}"
        )
    if kind in ("relu", "leaky_relu", "sigmoid"):
        n = int(rng.integers(2, 9))
        alpha = float(rng.uniform(0.05, 0.5))
        layer = ActivationSpec(function=kind, alpha=alpha)
        return NetworkSpec(layers=[layer], input_shape=(n,)), f"{kind} on {n}"
    if kind == "flatten":
        return NetworkSpec(layers=[FlattenSpec()], input_shape=(2, 2, 3)), "flatten 2x2x3"
    if kind == "reshape":
        return NetworkSpec(layers=[ReshapeSpec(target_shape=(3, 2, 2))], input_shape=(12,)), (
            "reshape 12 -> 3x2x2"
        )
    raise ValueError(f"Unknown layer kind '{kind}'")


LAYER_KINDS = [
    "dense",
    "conv2d",
    "maxpool2x2",
    "upsample2x2",
    "relu",
    "leaky_relu",
    "sigmoid",
    "flatten",
    "reshape",
]


def gradcheck(
    kinds: Optional[List[str]] = None,
    configurations: int = 20,
    seed: int = 0,
    raise_on_failure: bool = False,
) -> List[GradcheckRecord]:
    """
    Run the finite-difference check on random small configurations per layer kind.

    Args:
        kinds: Layer kinds to check (default: all)
        configurations: Random configurations per kind
        seed: Seed for shapes, parameters, inputs and probes
        raise_on_failure: Raise GradcheckFailedError on the first failing record

    Returns:
        One GradcheckRecord per configuration
    """
    rng = np.random.default_rng(seed)
    records = []
    for kind in kinds or LAYER_KINDS:
        for _ in range(configurations):
            spec, description = _random_case(rng, kind)
            net = init_network(spec, scheme="scaled", seed=int(rng.integers(2**31)))
            for params in net.params:
                if "bias" in params:
                    params["bias"][...] = rng.normal(size=params["bias"].shape)
            batch = int(rng.integers(1, 4))
            x = rng.normal(size=(batch,) + tuple(spec.input_shape))
            probe = rng.normal(size=(batch,) + tuple(spec.output_shape))
            record = check_network(net, x, probe, kind, description)
            records.append(record)
            if not record.passed:
                logger.warning(
                    f"Gradcheck failed for {description}: param {record.max_param_rel_error:.2e}, "
                    f"input {record.max_input_rel_error:.2e}"
                )
                if raise_on_failure:
                    raise GradcheckFailedError(f"Gradcheck failed for {description}")
    logger.info(f"Gradcheck: {sum(r.passed for r in records)}/{len(records)} configurations passed")
    return records
