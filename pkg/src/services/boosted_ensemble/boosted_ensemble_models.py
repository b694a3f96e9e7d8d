"""
Boosted Ensemble Models
=======================

Configuration, sample-weight and training-trace models of the boosted
autoencoder, plus its exception hierarchy.
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.services.nn_core import AdamConfig, InitScheme


# =============================================================================
# Exceptions
# =============================================================================


class BoostedEnsembleError(Exception):
    """Base exception for boosted ensemble training and inference."""

    pass


class StageOrderError(BoostedEnsembleError):
    """Raised when a stage is trained out of sequence or a stage index is out of range."""

    pass


class InvalidSampleWeightsError(BoostedEnsembleError):
    """Raised when sample weights are negative, non-finite or cannot be normalized."""

    pass


class UntrainedModelError(BoostedEnsembleError):
    """Raised when inference needs all M stages but fewer are trained."""

    pass


# =============================================================================
# Config
# =============================================================================


class BoostConfig(BaseModel):
    """
    Hyperparameters of one boosted training run.

    Attributes:
        M: Number of encoders (stages)
        I: Iterations per stage
        Q: Batch size per iteration
        adam: Optimizer settings shared by every encoder and the decoder
        seed: Root seed; every random stream of the run derives from it
        init_scheme: Weight initialization scheme of all networks
        validate_every: Validation interval in iterations (None uses the
            application setting)
    """

    model_config = ConfigDict(frozen=True)

    M: int = Field(..., ge=1, description="Number of encoders")
    I: int = Field(..., ge=1, description="Iterations per stage")  # noqa: E741
    Q: int = Field(..., ge=1, description="Batch size per iteration")
    adam: AdamConfig = Field(default_factory=AdamConfig)
    seed: int = Field(default=0)
    init_scheme: InitScheme = Field(default="paper_normal")
    validate_every: Optional[int] = Field(default=None, ge=1)


# =============================================================================
# Sample weights
# =============================================================================

WEIGHT_SUM_TOLERANCE = 1e-12


class SampleWeights(BaseModel):
    """A probability vector over the training samples."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: np.ndarray

    @field_validator("w", mode="before")
    @classmethod
    def check_distribution(cls, v):
        arr = np.array(v, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"weights must be a nonempty vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("weights must be finite and nonnegative")
        if abs(arr.sum() - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {arr.sum()!r}")
        arr.setflags(write=False)
        return arr

    @classmethod
    def from_unnormalized(cls, raw: np.ndarray) -> "SampleWeights":
        """
        Normalize nonnegative scores into weights.

        Raises:
            InvalidSampleWeightsError: If scores are negative, non-finite or all zero
        """
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim != 1 or raw.size == 0:
            raise InvalidSampleWeightsError(f"Expected a nonempty vector, got shape {raw.shape}")
        if not np.all(np.isfinite(raw)) or np.any(raw < 0):
            raise InvalidSampleWeightsError("Sample scores must be finite and nonnegative")
        total = raw.sum()
        if total <= 0:
            raise InvalidSampleWeightsError("Sample scores sum to zero; cannot normalize")
        return cls(w=raw / total)

    def __len__(self) -> int:
        return len(self.w)


# =============================================================================
# Trace
# =============================================================================


class TraceRow(BaseModel):
    """
    One training iteration.

    Attributes:
        stage: Stage index m (epoch index for single-AE training), from 1
        iteration: Iteration within the stage (batch within the epoch), from 1
        samples_seen: Cumulative sample presentations since the run started
        train_mse: MSE of the iteration's batch before the update
        val_mse: Validation MSE after the update, when validation ran
    """

    model_config = ConfigDict(frozen=True)

    stage: int = Field(..., ge=1)
    iteration: int = Field(..., ge=1)
    samples_seen: int = Field(..., ge=0)
    train_mse: float
    val_mse: Optional[float] = None

    @property
    def key(self) -> Tuple[int, int]:
        return (self.stage, self.iteration)


class TrainTrace(BaseModel):
    """Ordered per-iteration records of a training run."""

    rows: List[TraceRow] = Field(default_factory=list)

    @field_validator("rows")
    @classmethod
    def check_order(cls, rows):
        for prev, row in zip(rows, rows[1:]):
            if row.key <= prev.key:
                raise ValueError(f"Trace keys must increase: {prev.key} then {row.key}")
        return rows

    def __len__(self) -> int:
        return len(self.rows)

    def append(self, row: TraceRow) -> None:
        if self.rows and row.key <= self.rows[-1].key:
            raise ValueError(f"Trace keys must increase: {self.rows[-1].key} then {row.key}")
        self.rows.append(row)

    def extend(self, other: "TrainTrace") -> None:
        for row in other.rows:
            self.append(row)

    def validation_rows(self) -> List[TraceRow]:
        return [r for r in self.rows if r.val_mse is not None]

    @property
    def final_val_mse(self) -> Optional[float]:
        rows = self.validation_rows()
        return rows[-1].val_mse if rows else None

    def stage_rows(self, stage: int) -> List[TraceRow]:
        return [r for r in self.rows if r.stage == stage]
