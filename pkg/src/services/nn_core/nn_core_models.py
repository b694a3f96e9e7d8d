"""
Neural-Network Core Models
==========================

Pydantic v2 models describing layer-by-layer architectures and optimizer
settings, plus the exception hierarchy of the nn_core engine.

Shapes are per-sample (no batch axis): a 3×32×32 image has shape (3, 32, 32),
a flat feature vector of 64 values has shape (64,).
"""

from math import prod
from typing import Annotated, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# =============================================================================
# Exceptions
# =============================================================================


class NnCoreError(Exception):
    """Base exception for neural-network engine errors."""

    pass


class ShapeMismatchError(NnCoreError):
    """Raised when a tensor does not have the shape an operation expects."""

    pass


class StaleCacheError(NnCoreError):
    """Raised when backward is given a cache from another network or parameter version."""

    pass


class NonFiniteValueError(NnCoreError):
    """Raised in debug mode when a NaN or Inf shows up in activations, gradients or params."""

    pass


class GradcheckFailedError(NnCoreError):
    """Raised when backprop disagrees with finite differences beyond tolerance."""

    pass


# =============================================================================
# Layer specs
# =============================================================================

Shape = Tuple[int, ...]

InitScheme = Literal["paper_normal", "scaled"]


class _LayerBase(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def has_params(self) -> bool:
        return False

    def output_shape(self, input_shape: Shape) -> Shape:
        raise NotImplementedError


class DenseSpec(_LayerBase):
    """Fully connected layer: weight [out_units, in_units], bias [out_units]."""

    kind: Literal["dense"] = "dense"
    in_units: int = Field(..., ge=1)
    out_units: int = Field(..., ge=1)

    @property
    def has_params(self) -> bool:
        return True

    def output_shape(self, input_shape: Shape) -> Shape:
        if tuple(input_shape) != (self.in_units,):
            raise ValueError(f"dense expects input ({self.in_units},), got {tuple(input_shape)}")
        return (self.out_units,)


class Conv2dSpec(_LayerBase):
    """2-D cross-correlation: weight [out, in, k, k], bias [out]."""

    kind: Literal["conv2d"] = "conv2d"
    in_channels: int = Field(..., ge=1)
    out_channels: int = Field(..., ge=1)
    kernel: int = Field(..., ge=1)
    stride: int = Field(1, ge=1)
    padding: int = Field(0, ge=0)

    @property
    def has_params(self) -> bool:
        return True

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3 or input_shape[0] != self.in_channels:
            raise ValueError(
                f"conv2d expects input ({self.in_channels}, H, W), got {tuple(input_shape)}"
            )
        _, h, w = input_shape
        if h + 2 * self.padding < self.kernel or w + 2 * self.padding < self.kernel:
            raise ValueError(
                f"conv2d kernel {self.kernel} larger than padded input {h}x{w} "
                f"(padding {self.padding})"
            )
        out_h = (h + 2 * self.padding - self.kernel) // self.stride + 1
        out_w = (w + 2 * self.padding - self.kernel) // self.stride + 1
        return (self.out_channels, out_h, out_w)


class MaxPool2x2Spec(_LayerBase):
    """2×2 max pooling with stride 2; odd trailing rows/columns are dropped."""

    kind: Literal["maxpool2x2"] = "maxpool2x2"

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3 or input_shape[1] < 2 or input_shape[2] < 2:
            raise ValueError(f"maxpool2x2 expects (C, H>=2, W>=2), got {tuple(input_shape)}")
        c, h, w = input_shape
        return (c, h // 2, w // 2)


class Upsample2x2Spec(_LayerBase):
    """Nearest-neighbour 2× upsampling of both spatial axes."""

    kind: Literal["upsample2x2"] = "upsample2x2"

    def output_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3:
            raise ValueError(f"upsample2x2 expects (C, H, W), got {tuple(input_shape)}")
        c, h, w = input_shape
        return (c, 2 * h, 2 * w)


class ActivationSpec(_LayerBase):
    """Elementwise nonlinearity."""

    kind: Literal["activation"] = "activation"
    function: Literal["relu", "leaky_relu", "sigmoid"]
    alpha: float = Field(0.1, gt=0.0, lt=1.0, description="Leakiness, used by leaky_relu only")

    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class FlattenSpec(_LayerBase):
    """Collapse every per-sample axis into one feature axis."""

    kind: Literal["flatten"] = "flatten"

    def output_shape(self, input_shape: Shape) -> Shape:
        return (prod(input_shape),)


class ReshapeSpec(_LayerBase):
    """Reinterpret the per-sample values with a new shape of equal size."""

    kind: Literal["reshape"] = "reshape"
    target_shape: Tuple[int, ...]

    @field_validator("target_shape")
    @classmethod
    def positive_dims(cls, v):
        if not v or any(d < 1 for d in v):
            raise ValueError(f"target_shape must hold positive sizes, got {v}")
        return tuple(v)

    def output_shape(self, input_shape: Shape) -> Shape:
        if prod(input_shape) != prod(self.target_shape):
            raise ValueError(
                f"reshape cannot map {tuple(input_shape)} onto {self.target_shape}"
            )
        return self.target_shape


LayerSpec = Annotated[
    Union[
        DenseSpec,
        Conv2dSpec,
        MaxPool2x2Spec,
        Upsample2x2Spec,
        ActivationSpec,
        FlattenSpec,
        ReshapeSpec,
    ],
    Field(discriminator="kind"),
]


class NetworkSpec(BaseModel):
    """
    Ordered layer list plus the per-sample input shape.

    Construction walks the layers and rejects the first pair whose shapes do not
    chain, naming both layers.

    Attributes:
        layers: Ordered layer specifications
        input_shape: Shape of one input sample
    """

    model_config = ConfigDict(frozen=True)

    layers: List[LayerSpec] = Field(..., min_length=1)
    input_shape: Tuple[int, ...]

    @field_validator("input_shape")
    @classmethod
    def positive_input_dims(cls, v):
        if not v or any(d < 1 for d in v):
            raise ValueError(f"input_shape must hold positive sizes, got {v}")
        return tuple(v)

    @model_validator(mode="after")
    def check_chaining(self):
        shape = self.input_shape
        previous = "input"
        for idx, layer in enumerate(self.layers):
            current = f"layer {idx} ({layer.kind})"
            try:
                shape = layer.output_shape(shape)
            except ValueError as e:
                raise ValueError(f"{previous} -> {current}: {e}") from e
            previous = current
        return self

    def layer_shapes(self) -> List[Tuple[Shape, Shape]]:
        """Return (input_shape, output_shape) for every layer."""
        shapes = []
        shape = self.input_shape
        for layer in self.layers:
            out = layer.output_shape(shape)
            shapes.append((shape, out))
            shape = out
        return shapes

    @property
    def output_shape(self) -> Shape:
        return self.layer_shapes()[-1][1]


class AdamConfig(BaseModel):
    """Adam optimizer hyperparameters."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(1e-3, gt=0.0)
    beta1: float = Field(0.9, gt=0.0, lt=1.0)
    beta2: float = Field(0.999, gt=0.0, lt=1.0)
    epsilon: float = Field(1e-8, gt=0.0)


class GradcheckRecord(BaseModel):
    """Outcome of a finite-difference check for one layer configuration."""

    layer_kind: str
    description: str
    max_param_rel_error: float = 0.0
    max_input_rel_error: float = 0.0
    passed: bool
