"""
Layer Kernels
=============

Batched forward/backward kernels for every layer kind, written against numpy
float64 arrays with a leading batch axis (N, ...).

Each kind exposes a forward returning (output, cache) and a backward taking
(cache, grad_output) and returning (grad_input, param_grads). These functions are
pure: they never mutate their inputs.
"""

import logging
from typing import Any, Callable, Dict, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .nn_core_models import (
    ActivationSpec,
    Conv2dSpec,
    DenseSpec,
    FlattenSpec,
    MaxPool2x2Spec,
    ReshapeSpec,
    ShapeMismatchError,
    Upsample2x2Spec,
)

logger = logging.getLogger(__name__)

Params = Dict[str, np.ndarray]


# =============================================================================
# Dense
# =============================================================================


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """y = x Wᵀ + b for a batch x of shape (N, in)."""
    return x @ weight.T + bias


def dense_backward(
    x: np.ndarray, weight: np.ndarray, grad_out: np.ndarray
) -> Tuple[np.ndarray, Params]:
    grads = {"weight": grad_out.T @ x, "bias": grad_out.sum(axis=0)}
    return grad_out @ weight, grads


# =============================================================================
# Conv2D (cross-correlation, no kernel flip)
# =============================================================================


def _as_batch(x: np.ndarray) -> Tuple[np.ndarray, bool]:
    if x.ndim == 3:
        return x[np.newaxis], True
    if x.ndim == 4:
        return x, False
    raise ShapeMismatchError(f"conv2d expects (C, H, W) or (N, C, H, W), got {x.shape}")


def _conv_windows(x_padded: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    # (N, C, H', W', k, k) restricted to the strided output grid
    windows = sliding_window_view(x_padded, (kernel, kernel), axis=(2, 3))
    return windows[:, :, ::stride, ::stride]


def conv2d_forward(
    x: np.ndarray,
    weights: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """
    2-D cross-correlation of x with weights plus a per-channel bias.

    Args:
        x: Input of shape (C, H, W) or batched (N, C, H, W)
        weights: Kernel of shape (O, C, k, k)
        bias: Bias of shape (O,)
        stride: Step between kernel placements
        padding: Zero padding added on every spatial border

    Returns:
        Output of shape (O, H_out, W_out) (batched if x was batched), where
        H_out = floor((H + 2·padding − k) / stride) + 1.

    Raises:
        ShapeMismatchError: If channels disagree or the kernel exceeds the padded input

    Example:
        >>> conv2d_forward(np.array([[[1., 2.], [3., 4.]]]), np.ones((1, 1, 2, 2)), np.zeros(1))
        array([[[10.]]])
    """
    xb, single = _as_batch(x)
    out_channels, in_channels, kernel, _ = weights.shape
    if xb.shape[1] != in_channels:
        raise ShapeMismatchError(
            f"conv2d expects {in_channels} input channels, got {xb.shape[1]}"
        )
    h, w = xb.shape[2], xb.shape[3]
    if h + 2 * padding < kernel or w + 2 * padding < kernel:
        raise ShapeMismatchError(
            f"conv2d kernel {kernel} larger than padded input {h}x{w} (padding {padding})"
        )

    xp = np.pad(xb, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = _conv_windows(xp, kernel, stride)
    out = np.einsum("nchwij,ocij->nohw", windows, weights, optimize=True)
    out += bias[np.newaxis, :, np.newaxis, np.newaxis]
    return out[0] if single else out


def conv2d_backward(
    x: np.ndarray,
    weights: np.ndarray,
    grad_out: np.ndarray,
    stride: int,
    padding: int,
) -> Tuple[np.ndarray, Params]:
    kernel = weights.shape[2]
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = _conv_windows(xp, kernel, stride)
    out_h, out_w = grad_out.shape[2], grad_out.shape[3]

    grad_w = np.einsum("nchwij,nohw->ocij", windows, grad_out, optimize=True)
    grad_b = grad_out.sum(axis=(0, 2, 3))

    grad_xp = np.zeros_like(xp)
    for i in range(kernel):
        for j in range(kernel):
            contribution = np.einsum("nohw,oc->nchw", grad_out, weights[:, :, i, j])
            grad_xp[:, :, i : i + stride * out_h : stride, j : j + stride * out_w : stride] += (
                contribution
            )
    h, w = x.shape[2], x.shape[3]
    grad_x = grad_xp[:, :, padding : padding + h, padding : padding + w]
    return grad_x, {"weight": grad_w, "bias": grad_b}


# =============================================================================
# Max-pool 2×2 / Upsample 2×2
# =============================================================================


def maxpool2x2_forward(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    2×2 max pooling with stride 2.

    Returns:
        Tuple of (pooled output, argmax index 0..3 of each window in row-major
        order). Ties resolve to the first occurrence.
    """
    n, c, h, w = x.shape
    oh, ow = h // 2, w // 2
    blocks = x[:, :, : 2 * oh, : 2 * ow].reshape(n, c, oh, 2, ow, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, oh, ow, 4)
    argmax = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, argmax[..., np.newaxis], axis=-1)[..., 0]
    return out, argmax


def maxpool2x2_backward(
    input_shape: Tuple[int, ...], argmax: np.ndarray, grad_out: np.ndarray
) -> np.ndarray:
    n, c, h, w = input_shape
    oh, ow = h // 2, w // 2
    routed = np.zeros((n, c, oh, ow, 4))
    np.put_along_axis(routed, argmax[..., np.newaxis], grad_out[..., np.newaxis], axis=-1)
    routed = routed.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    grad_x = np.zeros(input_shape)
    grad_x[:, :, : 2 * oh, : 2 * ow] = routed.reshape(n, c, 2 * oh, 2 * ow)
    return grad_x


def upsample2x2_forward(x: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)


def upsample2x2_backward(grad_out: np.ndarray) -> np.ndarray:
    n, c, h, w = grad_out.shape
    return grad_out.reshape(n, c, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


# =============================================================================
# Activations
# =============================================================================


def sigmoid(x: np.ndarray) -> np.ndarray:
    # tanh form never overflows
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def activation_forward(kind: str, x: np.ndarray, alpha: float = 0.1) -> np.ndarray:
    """
    Apply an elementwise activation.

    Args:
        kind: One of "relu", "leaky_relu", "sigmoid"
        x: Input array of any shape
        alpha: Negative-side slope for leaky_relu

    Returns:
        Array of the same shape as x

    Example:
        >>> activation_forward("leaky_relu", np.array([-1.0]), alpha=0.1)
        array([-0.1])
    """
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "leaky_relu":
        return np.where(x > 0, x, alpha * x)
    if kind == "sigmoid":
        return sigmoid(x)
    raise ValueError(f"Unknown activation '{kind}'")


def activation_backward(
    kind: str, x: np.ndarray, y: np.ndarray, grad_out: np.ndarray, alpha: float = 0.1
) -> np.ndarray:
    if kind == "relu":
        return grad_out * (x > 0)
    if kind == "leaky_relu":
        return np.where(x > 0, grad_out, alpha * grad_out)
    if kind == "sigmoid":
        return grad_out * y * (1.0 - y)
    raise ValueError(f"Unknown activation '{kind}'")


# =============================================================================
# Dispatch by layer spec
# =============================================================================


def _dense_fwd(layer: DenseSpec, params: Params, x: np.ndarray):
    return dense_forward(x, params["weight"], params["bias"]), x


def _dense_bwd(layer: DenseSpec, params: Params, cache: Any, grad: np.ndarray):
    return dense_backward(cache, params["weight"], grad)


def _conv_fwd(layer: Conv2dSpec, params: Params, x: np.ndarray):
    out = conv2d_forward(x, params["weight"], params["bias"], layer.stride, layer.padding)
    return out, x


def _conv_bwd(layer: Conv2dSpec, params: Params, cache: Any, grad: np.ndarray):
    return conv2d_backward(cache, params["weight"], grad, layer.stride, layer.padding)


def _pool_fwd(layer: MaxPool2x2Spec, params: Params, x: np.ndarray):
    out, argmax = maxpool2x2_forward(x)
    return out, (x.shape, argmax)


def _pool_bwd(layer: MaxPool2x2Spec, params: Params, cache: Any, grad: np.ndarray):
    input_shape, argmax = cache
    return maxpool2x2_backward(input_shape, argmax, grad), {}


def _up_fwd(layer: Upsample2x2Spec, params: Params, x: np.ndarray):
    return upsample2x2_forward(x), None


def _up_bwd(layer: Upsample2x2Spec, params: Params, cache: Any, grad: np.ndarray):
    return upsample2x2_backward(grad), {}


def _act_fwd(layer: ActivationSpec, params: Params, x: np.ndarray):
    y = activation_forward(layer.function, x, layer.alpha)
    return y, (x, y)


def _act_bwd(layer: ActivationSpec, params: Params, cache: Any, grad: np.ndarray):
    x, y = cache
    return activation_backward(layer.function, x, y, grad, layer.alpha), {}


def _flatten_fwd(layer: FlattenSpec, params: Params, x: np.ndarray):
    return x.reshape(x.shape[0], -1), x.shape


def _reshape_fwd(layer: ReshapeSpec, params: Params, x: np.ndarray):
    return x.reshape((x.shape[0],) + tuple(layer.target_shape)), x.shape


def _restore_shape_bwd(layer, params: Params, cache: Any, grad: np.ndarray):
    return grad.reshape(cache), {}


LAYER_FORWARD: Dict[str, Callable] = {
    "dense": _dense_fwd,
    "conv2d": _conv_fwd,
    "maxpool2x2": _pool_fwd,
    "upsample2x2": _up_fwd,
    "activation": _act_fwd,
    "flatten": _flatten_fwd,
    "reshape": _reshape_fwd,
}

LAYER_BACKWARD: Dict[str, Callable] = {
    "dense": _dense_bwd,
    "conv2d": _conv_bwd,
    "maxpool2x2": _pool_bwd,
    "upsample2x2": _up_bwd,
    "activation": _act_bwd,
    "flatten": _restore_shape_bwd,
    "reshape": _restore_shape_bwd,
}
