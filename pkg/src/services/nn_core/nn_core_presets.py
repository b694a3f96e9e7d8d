"""
Architecture Presets
====================

Encoder architectures of the reconstruction, anomaly-detection and clustering
experiments, the symmetric decoder construction, and the hyperparameters that go
with each preset.
"""

import logging
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from .nn_core_models import (
    ActivationSpec,
    Conv2dSpec,
    DenseSpec,
    FlattenSpec,
    MaxPool2x2Spec,
    NetworkSpec,
    ReshapeSpec,
    Upsample2x2Spec,
)

logger = logging.getLogger(__name__)


class ArchitecturePreset(BaseModel):
    """
    A named encoder architecture with its training hyperparameters.

    Attributes:
        name: Preset key used by run configs and the --preset flag
        encoder: Encoder spec; the decoder is always mirror_decoder(encoder)
        hidden_activation: Activation placed after hidden decoder layers
        learning_rate: Adam learning rate
        num_encoders, iterations, batch_size: Boosting schedule (M, I, Q)
        epochs: Epochs of the single-AE baseline (batch size shared with Q)
    """

    model_config = ConfigDict(frozen=True)

    name: str
    encoder: NetworkSpec
    hidden_activation: ActivationSpec
    learning_rate: float
    num_encoders: int
    iterations: int
    batch_size: int
    epochs: int


# =============================================================================
# Decoder construction
# =============================================================================


def _mirror_conv(layer: Conv2dSpec, enc_in: Tuple[int, ...], enc_out: Tuple[int, ...]):
    """Layers that map a conv's output shape back onto its input shape."""
    in_h, in_w = enc_in[1], enc_in[2]
    out_h, out_w = enc_out[1], enc_out[2]

    if layer.stride == 1:
        # stride-1 transposed conv: same kernel, padding k-1-p
        padding = layer.kernel - 1 - layer.padding
        if padding < 0:
            raise ValueError(f"Cannot mirror conv2d with padding {layer.padding} > kernel - 1")
        return [
            Conv2dSpec(
                in_channels=layer.out_channels,
                out_channels=layer.in_channels,
                kernel=layer.kernel,
                stride=1,
                padding=padding,
            )
        ]

    if layer.stride == 2:
        # upsample to 2·out, then a padding-1 conv sized to land exactly on the input size
        kernel_h = 2 * out_h + 3 - in_h
        kernel_w = 2 * out_w + 3 - in_w
        if kernel_h != kernel_w or kernel_h < 1:
            raise ValueError(
                f"Cannot mirror stride-2 conv2d from {enc_out} back to {enc_in} with a square kernel"
            )
        return [
            Upsample2x2Spec(),
            Conv2dSpec(
                in_channels=layer.out_channels,
                out_channels=layer.in_channels,
                kernel=kernel_h,
                stride=1,
                padding=1,
            ),
        ]

    raise ValueError(f"Cannot mirror conv2d with stride {layer.stride}; only 1 and 2 are supported")


def mirror_decoder(
    encoder: NetworkSpec, hidden_activation: Optional[ActivationSpec] = None
) -> NetworkSpec:
    """
    Build the decoder symmetric to an encoder.

    Parametric layers are mirrored in reverse order, max-pooling becomes
    upsampling, flatten becomes reshape. The hidden activation follows every
    decoder parametric layer except the last one, which is followed by a sigmoid
    so outputs land in [0, 1].

    Args:
        encoder: Encoder spec
        hidden_activation: Activation for hidden decoder layers (default ReLU)

    Returns:
        Decoder spec whose input shape is the encoder output shape and whose
        output shape is the encoder input shape

    Example:
        >>> enc = NetworkSpec(layers=[DenseSpec(in_units=4, out_units=2)], input_shape=(4,))
        >>> [layer.kind for layer in mirror_decoder(enc).layers]
        ['dense', 'activation']
    """
    hidden = hidden_activation or ActivationSpec(function="relu")
    shapes = encoder.layer_shapes()

    mirrored: List[list] = []
    for layer, (enc_in, enc_out) in reversed(list(zip(encoder.layers, shapes))):
        if isinstance(layer, DenseSpec):
            mirrored.append([DenseSpec(in_units=layer.out_units, out_units=layer.in_units)])
        elif isinstance(layer, Conv2dSpec):
            mirrored.append(_mirror_conv(layer, enc_in, enc_out))
        elif isinstance(layer, MaxPool2x2Spec):
            if enc_in[1] % 2 or enc_in[2] % 2:
                raise ValueError(f"Cannot mirror max-pooling over odd spatial size {enc_in}")
            mirrored.append([Upsample2x2Spec()])
        elif isinstance(layer, FlattenSpec):
            mirrored.append([ReshapeSpec(target_shape=enc_in)])
        elif isinstance(layer, ReshapeSpec):
            mirrored.append([ReshapeSpec(target_shape=enc_in)])
        elif isinstance(layer, Upsample2x2Spec):
            raise ValueError("Encoders with upsampling layers cannot be mirrored")
        # activations are re-inserted below

    param_positions = [
        i for i, group in enumerate(mirrored) if isinstance(group[-1], (DenseSpec, Conv2dSpec))
    ]
    if not param_positions:
        raise ValueError("Encoder has no parametric layer to mirror")
    last = param_positions[-1]

    layers = []
    for i, group in enumerate(mirrored):
        layers.extend(group)
        if i in param_positions:
            layers.append(ActivationSpec(function="sigmoid") if i == last else hidden)

    return NetworkSpec(layers=layers, input_shape=encoder.output_shape)


# =============================================================================
# Presets
# =============================================================================


def _conv_stack(
    input_shape: Tuple[int, ...],
    convs: List[Tuple[int, int, int, int, int]],
    activation: ActivationSpec,
    pool: bool = False,
    dense_units: Optional[int] = None,
) -> NetworkSpec:
    layers: list = []
    for i, o, k, s, p in convs:
        layers.append(Conv2dSpec(in_channels=i, out_channels=o, kernel=k, stride=s, padding=p))
        if pool:
            layers.append(MaxPool2x2Spec())
        layers.append(activation)
    if dense_units is not None:
        # infer flattened width from the conv trunk
        trunk = NetworkSpec(layers=layers, input_shape=input_shape)
        width = 1
        for d in trunk.output_shape:
            width *= d
        layers += [FlattenSpec(), DenseSpec(in_units=width, out_units=dense_units), activation]
    return NetworkSpec(layers=layers, input_shape=input_shape)


def _dense_stack(
    input_shape: Tuple[int, ...], widths: List[int], activation: ActivationSpec
) -> NetworkSpec:
    layers: list = [FlattenSpec()]
    width = 1
    for d in input_shape:
        width *= d
    for units in widths:
        layers += [DenseSpec(in_units=width, out_units=units), activation]
        width = units
    return NetworkSpec(layers=layers, input_shape=input_shape)


RELU = ActivationSpec(function="relu")
LEAKY = ActivationSpec(function="leaky_relu", alpha=0.1)


def _build_presets() -> Dict[str, ArchitecturePreset]:
    presets = [
        ArchitecturePreset(
            name="cifar-conv-paper",
            encoder=_conv_stack(
                (3, 32, 32), [(3, 8, 4, 2, 1), (8, 16, 4, 2, 1), (16, 16, 4, 2, 1)], RELU
            ),
            hidden_activation=RELU,
            learning_rate=3e-3,
            num_encoders=20,
            iterations=2000,
            batch_size=50,
            epochs=50,
        ),
        ArchitecturePreset(
            name="fmnist-conv-paper",
            encoder=_conv_stack(
                (1, 28, 28),
                [(1, 2, 4, 2, 1), (2, 4, 4, 2, 1), (4, 8, 3, 2, 1), (8, 8, 4, 2, 1)],
                RELU,
            ),
            hidden_activation=RELU,
            learning_rate=5e-3,
            num_encoders=20,
            iterations=2000,
            batch_size=50,
            epochs=40,
        ),
        ArchitecturePreset(
            name="cifar-lenet-anomaly",
            encoder=_conv_stack(
                (3, 32, 32),
                [(3, 32, 3, 1, 1), (32, 64, 3, 1, 1), (64, 64, 3, 1, 1)],
                LEAKY,
                pool=True,
                dense_units=256,
            ),
            hidden_activation=LEAKY,
            learning_rate=3e-3,
            num_encoders=5,
            iterations=1800,
            batch_size=50,
            epochs=100,
        ),
        ArchitecturePreset(
            name="fmnist-dense-paper",
            encoder=_dense_stack((1, 28, 28), [512, 256, 128, 50], LEAKY),
            hidden_activation=LEAKY,
            learning_rate=3e-3,
            num_encoders=5,
            iterations=2000,
            batch_size=50,
            epochs=100,
        ),
        ArchitecturePreset(
            name="mnist-lenet-cluster",
            encoder=_conv_stack(
                (1, 28, 28),
                [(1, 8, 5, 1, 0), (8, 4, 5, 1, 0)],
                LEAKY,
                pool=True,
                dense_units=10,
            ),
            hidden_activation=LEAKY,
            learning_rate=3e-3,
            num_encoders=5,
            iterations=2000,
            batch_size=50,
            epochs=100,
        ),
        ArchitecturePreset(
            name="desk-dense",
            encoder=_dense_stack((1, 8, 8), [16, 4], RELU),
            hidden_activation=RELU,
            learning_rate=5e-3,
            num_encoders=3,
            iterations=50,
            batch_size=16,
            epochs=2,
        ),
        ArchitecturePreset(
            name="desk-conv",
            encoder=_conv_stack((1, 8, 8), [(1, 4, 4, 2, 1), (4, 4, 4, 2, 1)], RELU),
            hidden_activation=RELU,
            learning_rate=5e-3,
            num_encoders=3,
            iterations=50,
            batch_size=16,
            epochs=2,
        ),
    ]
    return {p.name: p for p in presets}


PRESETS: Dict[str, ArchitecturePreset] = _build_presets()


def get_preset(name: str) -> ArchitecturePreset:
    """
    Look up a preset by name.

    Raises:
        KeyError: If the name is unknown, listing the known names
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"Unknown preset '{name}'. Known presets: {sorted(PRESETS)}") from None
