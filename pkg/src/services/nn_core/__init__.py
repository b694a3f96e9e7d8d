"""
Neural-Network Core
===================

A small deterministic float64 engine: dense, conv2d, 2×2 max-pool, 2×2
upsample, activation, flatten and reshape layers, MSE loss, backpropagation and
Adam.

Usage:
    from src.services.nn_core import get_preset, mirror_decoder, init_network

    preset = get_preset("cifar-conv-paper")
    encoder = init_network(preset.encoder, scheme="paper_normal", seed=0)
    decoder = init_network(mirror_decoder(preset.encoder), seed=1)
"""

from .nn_core_models import (
    NnCoreError,
    ShapeMismatchError,
    StaleCacheError,
    NonFiniteValueError,
    GradcheckFailedError,
    DenseSpec,
    Conv2dSpec,
    MaxPool2x2Spec,
    Upsample2x2Spec,
    ActivationSpec,
    FlattenSpec,
    ReshapeSpec,
    LayerSpec,
    NetworkSpec,
    AdamConfig,
    InitScheme,
    GradcheckRecord,
)
from .nn_core_layers import conv2d_forward, activation_forward
from .nn_core_service import (
    Network,
    AdamState,
    ForwardCache,
    Gradients,
    init_network,
    param_shapes,
    forward,
    predict,
    backward,
    mse_loss,
    mse_loss_grad,
    adam_step,
)
from .nn_core_presets import ArchitecturePreset, PRESETS, get_preset, mirror_decoder
from .nn_core_gradcheck import LAYER_KINDS, gradcheck

__all__ = [
    "NnCoreError",
    "ShapeMismatchError",
    "StaleCacheError",
    "NonFiniteValueError",
    "GradcheckFailedError",
    "DenseSpec",
    "Conv2dSpec",
    "MaxPool2x2Spec",
    "Upsample2x2Spec",
    "ActivationSpec",
    "FlattenSpec",
    "ReshapeSpec",
    "LayerSpec",
    "NetworkSpec",
    "AdamConfig",
    "InitScheme",
    "GradcheckRecord",
    "conv2d_forward",
    "activation_forward",
    "Network",
    "AdamState",
    "ForwardCache",
    "Gradients",
    "init_network",
    "param_shapes",
    "forward",
    "predict",
    "backward",
    "mse_loss",
    "mse_loss_grad",
    "adam_step",
    "ArchitecturePreset",
    "PRESETS",
    "get_preset",
    "mirror_decoder",
    "LAYER_KINDS",
    "gradcheck",
]
