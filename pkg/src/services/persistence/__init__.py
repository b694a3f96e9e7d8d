"""
Persistence
===========

Checksummed binary model archives and JSON/CSV evaluation reports.

Usage:
    from src.services.persistence import EvalReport, emit_report, load_report

    report = EvalReport(kind="eval-anomaly")
    report.add_metric("auc", 0.93, normal_class=1)
    emit_report(report, "outputs/anomaly")
"""

from .persistence_models import (
    PersistenceError,
    ArchiveChecksumError,
    ArchiveVersionError,
    ArchiveTruncatedError,
    MetricRecord,
    EvalReport,
)
from .persistence_constants import ARCHIVE_FORMAT_VERSION, ARCHIVE_MAGIC, MODEL_FILE
from .persistence_service import (
    encode_archive,
    decode_archive,
    save_model,
    load_model,
    trace_frame,
    metrics_frame,
    auc_frame,
    nmi_frame,
    emit_report,
    load_report,
)

__all__ = [
    "PersistenceError",
    "ArchiveChecksumError",
    "ArchiveVersionError",
    "ArchiveTruncatedError",
    "MetricRecord",
    "EvalReport",
    "ARCHIVE_FORMAT_VERSION",
    "ARCHIVE_MAGIC",
    "MODEL_FILE",
    "encode_archive",
    "decode_archive",
    "save_model",
    "load_model",
    "trace_frame",
    "metrics_frame",
    "auc_frame",
    "nmi_frame",
    "emit_report",
    "load_report",
]
