"""
Persistence Models
==================

Evaluation report models shared by the training, anomaly and clustering
pipelines, plus the persistence exception hierarchy.
"""

import uuid
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.services.boosted_ensemble import TraceRow


# =============================================================================
# Exceptions
# =============================================================================


class PersistenceError(Exception):
    """Base exception for model archive and report I/O."""

    pass


class ArchiveChecksumError(PersistenceError):
    """Raised when an archive's SHA-256 trailer does not match its payload."""

    pass


class ArchiveVersionError(PersistenceError):
    """Raised for archives from another format version or with unexpected specs."""

    pass


class ArchiveTruncatedError(PersistenceError):
    """Raised when an archive ends before its declared content."""

    pass


# =============================================================================
# Reports
# =============================================================================


class MetricRecord(BaseModel):
    """
    One named value with its context.

    Attributes:
        name: Metric name, e.g. "auc", "val_mse", "nmi_best"
        value: Metric value
        stage: Boosting stage the value belongs to
        normal_class: Normal class of a one-class experiment
        other_class: Single anomaly class of a per-class breakdown
        reducer: Encoding used before clustering ("ensemble", "single-ae", "pca")
        seed: Seed of the run that produced the value
    """

    name: str
    value: float
    stage: Optional[int] = None
    normal_class: Optional[int] = None
    other_class: Optional[int] = None
    reducer: Optional[str] = None
    seed: Optional[int] = None


class EvalReport(BaseModel):
    """
    Self-describing outcome of a command: the resolved configuration, metric
    records and the training trace.
    """

    run_id: str = Field(default_factory=lambda: uuid.uuid4().hex)
    kind: str = Field(..., description="train-boosted, train-single, eval-anomaly, ...")
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    config: Dict[str, Any] = Field(default_factory=dict)
    metrics: List[MetricRecord] = Field(default_factory=list)
    trace: List[TraceRow] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)

    def add_metric(self, name: str, value: float, **context) -> MetricRecord:
        record = MetricRecord(name=name, value=float(value), **context)
        self.metrics.append(record)
        return record

    def metric_values(self, name: str, **context) -> List[float]:
        """Values of every metric called `name` whose fields match `context`."""
        return [
            m.value
            for m in self.metrics
            if m.name == name and all(getattr(m, k) == v for k, v in context.items())
        ]

    def merge(self, other: "EvalReport") -> None:
        """Append another report's metrics and notes."""
        self.metrics.extend(other.metrics)
        self.notes.extend(other.notes)
