"""
Evaluation Report Tests
=======================

Unit tests for EvalReport, the polars report tables and emit_report/load_report.
"""

import polars as pl
import pytest

from src.services.boosted_ensemble import TraceRow
from src.services.persistence import (
    EvalReport,
    auc_frame,
    emit_report,
    load_report,
    metrics_frame,
    nmi_frame,
    trace_frame,
)


@pytest.fixture
def report():
    report = EvalReport(
        kind="eval-anomaly",
        config={"seed": 0, "dataset": {"kind": "synth_images"}},
        trace=[
            TraceRow(stage=1, iteration=1, samples_seen=8, train_mse=0.3),
            TraceRow(stage=1, iteration=2, samples_seen=16, train_mse=0.2, val_mse=0.25),
        ],
        notes=["desk scale"],
    )
    report.add_metric("auc", 0.9, normal_class=1, seed=0)
    report.add_metric("auc", 0.8, normal_class=1, other_class=0, seed=0)
    report.add_metric("auc", 1.0, normal_class=1, other_class=2, seed=0)
    return report


class TestEvalReport:
    """Tests for EvalReport helpers."""

    def test_metric_values_filter(self, report):
        """Test metric values filter on context fields."""
        assert report.metric_values("auc", other_class=None) == [0.9]
        assert report.metric_values("auc", other_class=2) == [1.0]
        assert report.metric_values("nmi") == []

    def test_merge(self, report):
        """Test merging appends metrics and notes."""
        other = EvalReport(kind="eval-anomaly", notes=["second"])
        other.add_metric("auc", 0.7, normal_class=3)
        report.merge(other)
        assert report.metric_values("auc", normal_class=3) == [0.7]
        assert report.notes == ["desk scale", "second"]

    def test_unique_run_ids(self):
        """Test every report gets its own run id."""
        assert EvalReport(kind="x").run_id != EvalReport(kind="x").run_id


class TestFrames:
    """Tests for the polars report tables."""

    def test_trace_frame(self, report):
        """Test the trace table keeps iteration order and null validation cells."""
        frame = trace_frame(report)
        assert frame.height == 2
        assert frame["samples_seen"].to_list() == [8, 16]
        assert frame["val_mse"].to_list() == [None, 0.25]

    def test_auc_frame(self, report):
        """Test the AUC table has one overall row and one per anomaly class."""
        frame = auc_frame(report)
        assert frame.columns == ["normal_class", "other_class", "auc", "seed"]
        assert frame["other_class"].to_list() == [None, 0, 2]

    def test_nmi_frame(self):
        """Test NMI metrics pivot to one row per reducer."""
        report = EvalReport(kind="eval-cluster")
        for reducer, best in (("ensemble", 0.6), ("pca", 0.5)):
            report.add_metric("nmi", best, reducer=reducer, seed=0)
            report.add_metric("nmi_best", best, reducer=reducer, seed=0)
            report.add_metric("nmi_mean", best - 0.1, reducer=reducer)
            report.add_metric("nmi_std", 0.01, reducer=reducer)
        frame = nmi_frame(report)
        assert frame.columns == ["reducer", "nmi_best", "nmi_mean", "nmi_std"]
        assert frame["reducer"].to_list() == ["ensemble", "pca"]
        assert frame["nmi_best"].to_list() == [0.6, 0.5]

    def test_empty_frames(self):
        """Test reports without metrics give empty typed tables."""
        report = EvalReport(kind="train-boosted")
        assert metrics_frame(report).height == 0
        assert nmi_frame(report).columns == ["reducer", "nmi_best", "nmi_mean", "nmi_std"]


class TestEmitReport:
    """Tests for emit_report and load_report."""

    def test_files_written(self, report, temp_output_dir):
        """Test the JSON document and every table are written."""
        written = emit_report(report, temp_output_dir / "run")
        assert set(written) == {"report.json", "trace.csv", "metrics.csv", "auc.csv", "nmi.csv"}
        assert all(path.exists() for path in written.values())

    def test_round_trip(self, report, temp_output_dir):
        """Test load_report returns an equal report."""
        emit_report(report, temp_output_dir)
        assert load_report(temp_output_dir) == report

    def test_csv_readable(self, report, temp_output_dir):
        """Test the trace table reads back with polars."""
        written = emit_report(report, temp_output_dir)
        frame = pl.read_csv(written["trace.csv"])
        assert frame["iteration"].to_list() == [1, 2]

    def test_missing_report(self, temp_output_dir):
        """Test loading from a directory without a report fails."""
        with pytest.raises(FileNotFoundError):
            load_report(temp_output_dir / "missing")
