"""
Model Archives and Reports
==========================

Bit-exact ensemble serialization and report emission.

Usage:
    from src.services.persistence import save_model, load_model, emit_report

    save_model(model, "outputs/run/model.bae")
    restored = load_model("outputs/run/model.bae")
    emit_report(report, "outputs/run")
"""

import hashlib
import json
import logging
import struct
from math import prod
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import polars as pl

from src.services.boosted_ensemble import EnsembleModel
from src.services.nn_core import AdamState, Network, NetworkSpec, param_shapes

from .persistence_constants import (
    ARCHIVE_FORMAT_VERSION,
    ARCHIVE_MAGIC,
    AUC_CSV,
    CHECKSUM_BYTES,
    METRICS_CSV,
    NMI_CSV,
    PREAMBLE_BYTES,
    PREAMBLE_FORMAT,
    REPORT_JSON,
    TENSOR_DTYPE,
    TRACE_CSV,
)
from .persistence_models import (
    ArchiveChecksumError,
    ArchiveTruncatedError,
    ArchiveVersionError,
    EvalReport,
    PersistenceError,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# =============================================================================
# Model archive
# =============================================================================


def _networks(model: EnsembleModel) -> List[Tuple[str, Network]]:
    named = [(f"encoder/{j}", enc) for j, enc in enumerate(model.encoders)]
    return named + [("decoder", model.decoder)]


def _tensor_entries(model: EnsembleModel) -> List[Tuple[Dict[str, Any], np.ndarray]]:
    entries = []
    for net_name, net in _networks(model):
        for layer_idx, params in enumerate(net.params):
            for name in ("weight", "bias"):
                if name in params:
                    entries.append(
                        ({"network": net_name, "layer": layer_idx, "name": name}, params[name])
                    )
    return entries


def encode_archive(model: EnsembleModel) -> bytes:
    """Serialize a model to archive bytes (layout in docs/MODEL_ARCHIVE_FORMAT.md)."""
    entries = _tensor_entries(model)
    header = {
        "M": model.M,
        "trained_stages": model.trained_stages,
        "label": model.label,
        "encoder_spec": model.encoder_spec.model_dump(mode="json"),
        "decoder_spec": model.decoder_spec.model_dump(mode="json"),
        "adam_steps": [net.adam_state.step for _, net in _networks(model)],
        "tensors": [meta for meta, _ in entries],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    parts = [
        struct.pack(PREAMBLE_FORMAT, ARCHIVE_MAGIC, ARCHIVE_FORMAT_VERSION, 0, len(header_bytes)),
        header_bytes,
    ]
    for _, array in entries:
        parts.append(struct.pack(f"<I{array.ndim}I", array.ndim, *array.shape))
        parts.append(np.ascontiguousarray(array, dtype=TENSOR_DTYPE).tobytes())
    payload = b"".join(parts)
    return payload + hashlib.sha256(payload).digest()


def save_model(model: EnsembleModel, path: PathLike) -> Path:
    """
    Write a model archive.

    Args:
        model: Ensemble to save (any number of trained stages)
        path: Target file; parent directories are created

    Returns:
        The written path

    Raises:
        PersistenceError: If the path cannot be written
    """
    path = Path(path)
    data = encode_archive(model)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as e:
        raise PersistenceError(f"Cannot write model archive {path}: {e}") from e
    logger.info(f"Saved model archive {path} ({len(data)} bytes, M={model.M})")
    return path


def _declared_length(header_len: int, header: Optional[Dict[str, Any]]) -> int:
    """
    Total archive length implied by the header's specs and tensor list; -1 when
    the header is unreadable. Tensor record dims are not consulted, so a
    corrupted dim cannot pass for a short file.
    """
    try:
        specs = {
            "encoder": NetworkSpec.model_validate(header["encoder_spec"]),
            "decoder": NetworkSpec.model_validate(header["decoder_spec"]),
        }
        length = PREAMBLE_BYTES + header_len + CHECKSUM_BYTES
        for meta in header["tensors"]:
            spec = specs["decoder" if meta["network"] == "decoder" else "encoder"]
            weight, bias, _ = param_shapes(spec.layers[meta["layer"]])
            shape = weight if meta["name"] == "weight" else bias
            length += 4 + 4 * len(shape) + 8 * prod(shape)
    except (KeyError, IndexError, TypeError, ValueError):
        return -1
    return length


def _read_preamble(raw: bytes, source: str) -> int:
    if len(raw) < PREAMBLE_BYTES:
        raise ArchiveTruncatedError(f"{source}: {len(raw)} bytes is shorter than the preamble")
    magic, version, _, header_len = struct.unpack_from(PREAMBLE_FORMAT, raw, 0)
    if magic != ARCHIVE_MAGIC:
        raise PersistenceError(f"{source}: not a model archive (magic {magic!r})")
    if version != ARCHIVE_FORMAT_VERSION:
        raise ArchiveVersionError(
            f"{source}: archive format version {version}, this build reads "
            f"version {ARCHIVE_FORMAT_VERSION}"
        )
    if PREAMBLE_BYTES + header_len + CHECKSUM_BYTES > len(raw):
        raise ArchiveTruncatedError(f"{source}: header of {header_len} bytes runs past the end")
    return header_len


def _verify(raw: bytes, header_len: int, source: str) -> Dict[str, Any]:
    header = None
    try:
        header = json.loads(raw[PREAMBLE_BYTES : PREAMBLE_BYTES + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        pass

    declared = _declared_length(header_len, header)

    payload, trailer = raw[:-CHECKSUM_BYTES], raw[-CHECKSUM_BYTES:]
    if hashlib.sha256(payload).digest() != trailer:
        if declared > len(raw):
            raise ArchiveTruncatedError(
                f"{source}: {len(raw)} bytes, but its tensors need at least {declared}"
            )
        raise ArchiveChecksumError(f"{source}: SHA-256 checksum mismatch")
    if declared != len(raw):
        raise PersistenceError(f"{source}: header does not describe the payload")
    return header


def _rebuild_network(spec: NetworkSpec, arrays: Dict[Tuple[int, str], np.ndarray], step: int):
    params = []
    for layer_idx, layer in enumerate(spec.layers):
        if layer.has_params:
            params.append({name: arrays[(layer_idx, name)] for name in ("weight", "bias")})
        else:
            params.append({})
    adam = AdamState(
        m=[{k: np.zeros_like(a) for k, a in p.items()} for p in params],
        v=[{k: np.zeros_like(a) for k, a in p.items()} for p in params],
        step=step,
    )
    return Network(spec=spec, params=params, adam_state=adam)


def decode_archive(
    raw: bytes,
    expected_encoder_spec: Optional[NetworkSpec] = None,
    expected_decoder_spec: Optional[NetworkSpec] = None,
    source: str = "<bytes>",
) -> EnsembleModel:
    """
    Parse archive bytes; see load_model.
    """
    header_len = _read_preamble(raw, source)
    header = _verify(raw, header_len, source)

    encoder_spec = NetworkSpec.model_validate(header["encoder_spec"])
    decoder_spec = NetworkSpec.model_validate(header["decoder_spec"])
    for label, expected, found in (
        ("encoder", expected_encoder_spec, encoder_spec),
        ("decoder", expected_decoder_spec, decoder_spec),
    ):
        if expected is not None and expected != found:
            raise ArchiveVersionError(f"{source}: archived {label} spec differs from expected")

    arrays: Dict[str, Dict[Tuple[int, str], np.ndarray]] = {}
    offset = PREAMBLE_BYTES + header_len
    for meta in header["tensors"]:
        (ndim,) = struct.unpack_from("<I", raw, offset)
        dims = struct.unpack_from(f"<{ndim}I", raw, offset + 4)
        offset += 4 + 4 * ndim
        count = prod(dims)
        values = np.frombuffer(raw, dtype=TENSOR_DTYPE, count=count, offset=offset)
        offset += 8 * count
        arrays.setdefault(meta["network"], {})[(meta["layer"], meta["name"])] = (
            values.astype(np.float64).reshape(dims)
        )

    steps = header["adam_steps"]
    encoders = [
        _rebuild_network(encoder_spec, arrays[f"encoder/{j}"], steps[j])
        for j in range(header["M"])
    ]
    decoder = _rebuild_network(decoder_spec, arrays["decoder"], steps[-1])
    _check_param_shapes(encoders + [decoder], source)
    return EnsembleModel(
        encoders=encoders,
        decoder=decoder,
        trained_stages=header["trained_stages"],
        label=header.get("label"),
    )


def _check_param_shapes(networks: List[Network], source: str) -> None:
    for net in networks:
        for layer, params in zip(net.spec.layers, net.params):
            shapes = param_shapes(layer)
            if shapes is None:
                continue
            for name, shape in zip(("weight", "bias"), shapes[:2]):
                if params[name].shape != shape:
                    raise PersistenceError(
                        f"{source}: {layer.kind} {name} has shape {params[name].shape}, "
                        f"spec requires {shape}"
                    )


def load_model(
    path: PathLike,
    expected_encoder_spec: Optional[NetworkSpec] = None,
    expected_decoder_spec: Optional[NetworkSpec] = None,
) -> EnsembleModel:
    """
    Read a model archive written by save_model.

    The format version is checked before anything else, then the checksum, so
    no partially decoded model is ever returned.

    Args:
        path: Archive file
        expected_encoder_spec: When given, the archived encoder spec must equal it
        expected_decoder_spec: When given, the archived decoder spec must equal it

    Returns:
        EnsembleModel with bitwise-identical parameters and fresh optimizer
        moments (step counters restored)

    Raises:
        ArchiveVersionError: Other format version, or spec differs from expected
        ArchiveTruncatedError: File ends before its declared content
        ArchiveChecksumError: Payload does not match the SHA-256 trailer
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Model archive not found: {path}")
    model = decode_archive(
        path.read_bytes(), expected_encoder_spec, expected_decoder_spec, source=str(path)
    )
    logger.info(f"Loaded model archive {path} (M={model.M}, trained={model.trained_stages})")
    return model


# =============================================================================
# Reports
# =============================================================================

TRACE_SCHEMA = {
    "stage": pl.Int64,
    "iteration": pl.Int64,
    "samples_seen": pl.Int64,
    "train_mse": pl.Float64,
    "val_mse": pl.Float64,
}

METRIC_SCHEMA = {
    "name": pl.Utf8,
    "value": pl.Float64,
    "stage": pl.Int64,
    "normal_class": pl.Int64,
    "other_class": pl.Int64,
    "reducer": pl.Utf8,
    "seed": pl.Int64,
}

NMI_COLUMNS = ["nmi_best", "nmi_mean", "nmi_std"]


def trace_frame(report: EvalReport) -> pl.DataFrame:
    """Per-iteration trace, one row per iteration in training order."""
    return pl.DataFrame([r.model_dump() for r in report.trace], schema=TRACE_SCHEMA)


def metrics_frame(report: EvalReport) -> pl.DataFrame:
    return pl.DataFrame([m.model_dump() for m in report.metrics], schema=METRIC_SCHEMA)


def auc_frame(report: EvalReport) -> pl.DataFrame:
    """
    AUC rows: one per normal class (other_class null) plus the per-anomaly-class
    breakdown.
    """
    return (
        metrics_frame(report)
        .filter(pl.col("name") == "auc")
        .select("normal_class", "other_class", pl.col("value").alias("auc"), "seed")
    )


def nmi_frame(report: EvalReport) -> pl.DataFrame:
    """NMI table with one row per reducer, in first-appearance order."""
    frame = metrics_frame(report).filter(pl.col("name").is_in(NMI_COLUMNS))
    if frame.height == 0:
        return pl.DataFrame(schema={"reducer": pl.Utf8, **{c: pl.Float64 for c in NMI_COLUMNS}})
    table = frame.pivot(on="name", index="reducer", values="value", aggregate_function="first")
    for column in NMI_COLUMNS:
        if column not in table.columns:
            table = table.with_columns(pl.lit(None, dtype=pl.Float64).alias(column))
    return table.select("reducer", *NMI_COLUMNS)


def emit_report(report: EvalReport, directory: PathLike) -> Dict[str, Path]:
    """
    Write a report as JSON plus delimited tables.

    Files: report.json (the full document), trace.csv (validation curve data),
    metrics.csv (every metric), auc.csv (per-class AUC) and nmi.csv (per-reducer
    NMI).

    Returns:
        Mapping of file name to written path

    Raises:
        PersistenceError: If the directory cannot be written
    """
    directory = Path(directory)
    written = {}
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / REPORT_JSON
        path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        written[REPORT_JSON] = path

        for name, frame in (
            (TRACE_CSV, trace_frame(report)),
            (METRICS_CSV, metrics_frame(report)),
            (AUC_CSV, auc_frame(report)),
            (NMI_CSV, nmi_frame(report)),
        ):
            path = directory / name
            frame.write_csv(path)
            written[name] = path
    except OSError as e:
        raise PersistenceError(f"Cannot write report to {directory}: {e}") from e

    logger.info(
        f"Report {report.run_id[:8]} ({report.kind}) written to {directory}: "
        f"{len(report.metrics)} metrics, {len(report.trace)} trace rows"
    )
    return written


def load_report(directory: PathLike) -> EvalReport:
    """Re-read the report.json written by emit_report."""
    path = Path(directory) / REPORT_JSON
    if not path.exists():
        raise FileNotFoundError(f"Report not found: {path}")
    return EvalReport.model_validate_json(path.read_text(encoding="utf-8"))
