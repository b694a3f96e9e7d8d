"""
CLI Entry Point Tests
=====================

Unit tests for the `bae` argument parser, flag overrides, exit codes and
small end-to-end runs of every subcommand.
"""

import json

import pytest
import yaml

from src.cli.cli_models import RunConfig
from src.cli.main import EXIT_FAILURE, EXIT_INVALID, EXIT_OK, apply_overrides, build_parser, main
from src.services.persistence import load_model, load_report

BLOB_ENCODER = {
    "input_shape": [4],
    "layers": [
        {"kind": "dense", "in_units": 4, "out_units": 3},
        {"kind": "activation", "function": "leaky_relu", "alpha": 0.1},
        {"kind": "dense", "in_units": 3, "out_units": 2},
    ],
}


def _write(path, config):
    path.write_text(yaml.safe_dump(config))
    return str(path)


@pytest.fixture
def bars_config(tmp_path):
    return _write(
        tmp_path / "bars.yaml",
        {
            "dataset": {"kind": "synth_images", "n": 200, "fractions": [0.8, 0.2, 0.0]},
            "training": {"M": 2, "I": 5, "Q": 8, "epochs": 1, "validate_every": 5},
        },
    )


@pytest.fixture
def blobs_config(tmp_path):
    def make(**sections):
        config = {
            "dataset": {"kind": "synth_blobs", "n": 60, "classes": 3, "dim": 4, "normalize": True},
            "architecture": {"encoder": BLOB_ENCODER},
            "training": {"M": 2, "I": 5, "Q": 8},
        }
        config.update(sections)
        return _write(tmp_path / "blobs.yaml", config)

    return make


class TestParser:
    """Tests for build_parser and apply_overrides."""

    def test_subcommands(self):
        """Test every subcommand parses."""
        parser = build_parser()
        for command in ("train-boosted", "train-single", "eval-anomaly", "eval-cluster"):
            assert parser.parse_args([command]).command == command
        assert parser.parse_args(["gradcheck"]).configurations == 20

    def test_command_required(self):
        """Test a missing subcommand is a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_overrides(self, tmp_path):
        """Test flags replace seed, output directory, preset and desk scale."""
        argv = ["train-boosted", "--seed", "3", "--out", str(tmp_path), "--preset", "desk-conv"]
        args = build_parser().parse_args(argv + ["--desk-scale"])
        config = apply_overrides(RunConfig(), args)
        assert config.seed == 3
        assert config.output_dir == tmp_path
        assert config.desk_scale is True
        assert config.architecture.preset == "desk-conv"

    def test_no_overrides(self):
        """Test without flags the file configuration is unchanged."""
        args = build_parser().parse_args(["train-single"])
        assert apply_overrides(RunConfig(seed=9), args) == RunConfig(seed=9)


class TestExitCodes:
    """Tests for main's exit codes on bad input."""

    def test_missing_config(self, tmp_path):
        """Test a missing configuration file exits with 1."""
        assert main(["train-boosted", "--config", str(tmp_path / "absent.yaml")]) == EXIT_INVALID

    def test_invalid_field(self, tmp_path):
        """Test an invalid field exits with 1."""
        path = _write(tmp_path / "bad.yaml", {"training": {"M": 0}})
        assert main(["train-boosted", "--config", path]) == EXIT_INVALID

    def test_unknown_preset_flag(self, tmp_path):
        """Test an unknown --preset exits with 1."""
        assert main(["train-boosted", "--preset", "nope", "--out", str(tmp_path)]) == EXIT_INVALID

    def test_missing_input_files(self, tmp_path):
        """Test a dataset pointing at absent files exits with 1 and writes nothing."""
        path = _write(
            tmp_path / "idx.yaml",
            {"dataset": {"kind": "idx", "images_path": "a.gz", "labels_path": "b.gz"}},
        )
        out = tmp_path / "out"
        assert main(["train-boosted", "--config", path, "--out", str(out)]) == EXIT_INVALID
        assert not out.exists()

    def test_shape_mismatch(self, tmp_path):
        """Test samples that do not fit the encoder exit with 1."""
        path = _write(tmp_path / "blobs.yaml", {"dataset": {"kind": "synth_blobs", "n": 20}})
        assert main(["train-boosted", "--config", path, "--out", str(tmp_path)]) == EXIT_INVALID

    def test_runtime_failure(self, blobs_config, tmp_path):
        """Test a failure during evaluation exits with 2."""
        path = blobs_config(anomaly={"normal_classes": [7]})
        assert main(["eval-anomaly", "--config", path, "--out", str(tmp_path)]) == EXIT_FAILURE


class TestCommands:
    """Small end-to-end runs of each subcommand."""

    def test_train_boosted(self, bars_config, tmp_path, capsys):
        """Test train-boosted writes a loadable model and its report."""
        out = tmp_path / "run"
        argv = ["train-boosted", "--config", bars_config, "--out", str(out), "--desk-scale"]
        assert main(argv) == EXIT_OK
        model = load_model(out / "model.bae")
        assert model.M == 2 and model.trained_stages == 2
        report = load_report(out)
        assert report.kind == "train-boosted"
        assert len(report.trace) == 2 * 5
        assert len(report.metric_values("val_mse")) == 2
        assert "architecture preset: desk-dense" in report.notes
        assert "model.bae" in capsys.readouterr().out

    def test_report_echoes_resolved_config(self, bars_config, tmp_path):
        """Test the report carries the fully resolved configuration."""
        out = tmp_path / "run"
        main(["train-boosted", "--config", bars_config, "--out", str(out), "--seed", "5"])
        echoed = json.loads((out / "report.json").read_text())["config"]
        assert echoed["seed"] == 5
        assert echoed["training"]["learning_rate"] is not None
        assert echoed["architecture"]["encoder"] is not None

    def test_train_single(self, bars_config, tmp_path):
        """Test train-single writes a one-encoder model."""
        out = tmp_path / "single"
        assert main(["train-single", "--config", bars_config, "--out", str(out)]) == EXIT_OK
        model = load_model(out / "model.bae")
        assert model.M == 1
        assert load_report(out).kind == "train-single"

    def test_eval_anomaly_trains_per_class(self, blobs_config, tmp_path):
        """Test eval-anomaly trains and saves a model per normal class."""
        path = blobs_config(anomaly={"normal_classes": [0, 2]})
        out = tmp_path / "anomaly"
        assert main(["eval-anomaly", "--config", path, "--out", str(out)]) == EXIT_OK
        assert (out / "class_0" / "model.bae").exists()
        assert (out / "class_2" / "model.bae").exists()
        report = load_report(out)
        overall = report.metric_values("auc", other_class=None)
        assert len(overall) == 2
        assert all(0.0 <= auc <= 1.0 for auc in overall)

    def test_eval_anomaly_saved_model(self, blobs_config, tmp_path):
        """Test eval-anomaly scores a saved model for one normal class."""
        path = blobs_config(anomaly={"normal_classes": [1]})
        assert main(["train-boosted", "--config", path, "--out", str(tmp_path / "m")]) == EXIT_OK
        model = str(tmp_path / "m" / "model.bae")
        out = tmp_path / "scored"
        assert main(["eval-anomaly", "--config", path, "--out", str(out), "--model", model]) == 0
        assert not (out / "class_1").exists()
        assert len(load_report(out).metric_values("auc", other_class=None)) == 1

    def test_saved_model_needs_one_class(self, blobs_config, tmp_path):
        """Test --model with several normal classes exits with 1."""
        path = blobs_config(anomaly={"normal_classes": [0, 1]})
        argv = ["eval-anomaly", "--config", path, "--out", str(tmp_path)]
        assert main(argv + ["--model", str(tmp_path / "model.bae")]) == EXIT_INVALID

    def test_eval_cluster(self, blobs_config, tmp_path):
        """Test eval-cluster scores every configured reducer."""
        path = blobs_config(cluster={"k": 3, "seeds": [0, 1], "reducers": ["ensemble", "pca"]})
        out = tmp_path / "cluster"
        assert main(["eval-cluster", "--config", path, "--out", str(out)]) == EXIT_OK
        report = load_report(out)
        for reducer in ("ensemble", "pca"):
            assert len(report.metric_values("nmi", reducer=reducer)) == 2
            assert len(report.metric_values("nmi_best", reducer=reducer)) == 1
        assert report.config["protocol"]["k"] == 3
        assert (out / "nmi.csv").exists()

    def test_gradcheck(self, capsys):
        """Test gradcheck passes and prints one row per layer kind."""
        assert main(["gradcheck", "--seed", "0", "--configurations", "3"]) == EXIT_OK
        printed = capsys.readouterr().out
        for kind in ("dense", "conv2d", "maxpool2x2", "upsample2x2"):
            assert kind in printed
