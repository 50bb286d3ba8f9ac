"""
Tests for the sernn command line: exit codes, the JSON error line, output
guards, and the figures -> plot pipeline.

Run with:
    pytest backend/test_cli_pytest.py -v
"""
import json
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest
import yaml

from backend.app.core.errors import InvalidInputError
from backend.app.metrics import MetricRecord, MetricsTable
from backend.app.networks.spike_data import read_spike_dataset
from backend.app.selftest import BaseOracle, OracleResult, register_oracle
from backend.app.selftest.base import _ORACLE_REGISTRY
from cli import EXIT_OK, EXIT_RUNTIME, EXIT_SELFTEST, EXIT_USAGE, main
from cli.utils.render import render_svg

SMALL_LAB = {
    "stats": {"permutations": 99, "permutation_seed": 0},
    "lattice": {"dims": [2, 2, 2]},
    "rate": {"epochs": 1, "batch_size": 16, "trials_per_epoch": 32, "eval_trials": 32},
    "filters": {"thresholds": {"inference": -1.0, "shd": 0.45, "synthetic-spikes": 0.6}},
    "spiking": {
        "synthetic": {
            "classes": 3,
            "channels": 6,
            "template_size": 3,
            "duration_ms": 20.0,
            "train_samples_per_class": 4,
            "test_samples_per_class": 3,
        },
    },
}


@pytest.fixture
def small_lab(tmp_path, monkeypatch):
    """Point SERNN_CONFIG at an eight-neuron, one-epoch configuration."""
    path = tmp_path / "lab.yaml"
    path.write_text(yaml.safe_dump(SMALL_LAB), encoding="utf-8")
    monkeypatch.setenv("SERNN_CONFIG", str(path))
    return path


@pytest.fixture
def metrics_csv(tmp_path):
    rows = []
    for kind in ("l1", "sernn"):
        for seed in range(3):
            for epoch in range(3):
                rows.append(MetricRecord(
                    kind=kind, gamma=0.001, seed=seed, epoch=epoch, accuracy=0.95,
                    Q=0.1 * epoch + 0.01 * seed, H_W=0.5 - 0.05 * epoch, H_C=0.4, H_lambda=4.0,
                    lambda_max=1.0 + 0.1 * seed, total_weight=10.0 - epoch, sym_index=0.3,
                    imag_fraction=0.2, dist_corr_r=-0.2, dist_corr_p=0.01,
                ))
    return MetricsTable().upsert(rows).to_csv(tmp_path / "metrics.csv")


def _error_line(capsys) -> dict:
    lines = [ln for ln in capsys.readouterr().err.splitlines() if ln.startswith("{")]
    assert lines, "no JSON error line on stderr"
    return json.loads(lines[-1])


@pytest.mark.unit
class TestExitCodes:
    """Usage errors, runtime errors and the JSON error line."""

    def test_negative_gamma(self, tmp_path, capsys):
        code = main(["train", "--out", str(tmp_path / "r"), "--gamma=-1"])
        assert code == EXIT_USAGE
        err = _error_line(capsys)
        assert err["status"] == "error" and err["code"] == 1
        assert "--gamma" in err["message"]
        assert not (tmp_path / "r").exists()

    def test_unknown_kind(self, tmp_path, capsys):
        assert main(["train", "--out", str(tmp_path), "--kind", "l2"]) == EXIT_USAGE
        assert _error_line(capsys)["kind"] == "usage"

    def test_unknown_command(self, capsys):
        assert main(["fly"]) == EXIT_USAGE

    def test_missing_required_option(self, capsys):
        assert main(["analyze", "--out", "x.csv"]) == EXIT_USAGE

    def test_empty_runs_directory(self, tmp_path, capsys):
        (tmp_path / "runs").mkdir()
        code = main(["analyze", "--runs", str(tmp_path / "runs"), "--out", str(tmp_path / "m.csv")])
        assert code == EXIT_RUNTIME
        assert _error_line(capsys)["kind"] == "EmptySelectionError"

    def test_invalid_sweep_config(self, tmp_path, capsys):
        config = tmp_path / "sweep.json"
        config.write_text('{"kinds": ["l1", "l1"]}', encoding="utf-8")
        assert main(["sweep", "--config", str(config), "--out", str(tmp_path / "s")]) == EXIT_USAGE
        assert _error_line(capsys)["kind"] == "validation"


@pytest.mark.unit
class TestGenTask:
    """gen-task and the --force guard."""

    def test_writes_dataset(self, small_lab, tmp_path):
        out = tmp_path / "train.jsonl"
        assert main(["gen-task", "--out", str(out), "--seed", "2", "--samples-per-class", "2"]) == EXIT_OK
        ds = read_spike_dataset(out)
        assert (ds.classes, ds.channels, len(ds)) == (3, 6, 6)

    def test_split_defaults(self, small_lab, tmp_path):
        out = tmp_path / "test.jsonl"
        assert main(["gen-task", "--out", str(out), "--split", "test"]) == EXIT_OK
        assert len(read_spike_dataset(out)) == 9

    def test_refuses_to_overwrite(self, small_lab, tmp_path, capsys):
        out = tmp_path / "d.jsonl"
        assert main(["gen-task", "--out", str(out)]) == EXIT_OK
        before = out.read_bytes()
        assert main(["gen-task", "--out", str(out), "--seed", "9"]) == EXIT_USAGE
        assert "--out" in _error_line(capsys)["message"]
        assert out.read_bytes() == before
        assert main(["gen-task", "--out", str(out), "--seed", "9", "--force"]) == EXIT_OK
        assert out.read_bytes() != before

    def test_only_synthetic_task(self, tmp_path, capsys):
        assert main(["gen-task", "--out", str(tmp_path / "d.jsonl"), "--task", "shd"]) == EXIT_USAGE
        assert "--task" in _error_line(capsys)["message"]


@pytest.mark.integration
class TestTrainAndSweep:
    """train, sweep and analyze on eight-neuron networks."""

    def test_train(self, small_lab, tmp_path, capsys):
        code = main(["train", "--out", str(tmp_path), "--kind", "l1", "--gamma", "0.01", "--seed", "1"])
        assert code == EXIT_OK
        run_dir = tmp_path / "run_l1_0.01_1"
        assert (run_dir / "epoch_1" / "manifest.json").exists()
        assert json.loads((run_dir / "run.json").read_text(encoding="utf-8"))["status"] == "completed"

    def test_train_guard(self, small_lab, tmp_path, capsys):
        args = ["train", "--out", str(tmp_path), "--gamma", "0.01"]
        assert main(args) == EXIT_OK
        assert main(args) == EXIT_USAGE
        assert main([*args, "--force"]) == EXIT_OK

    def test_spiking_train(self, small_lab, tmp_path):
        code = main(["train", "--out", str(tmp_path), "--task", "synthetic-spikes", "--epochs", "1"])
        assert code == EXIT_OK
        assert (tmp_path / "run_sernn_0.0_0" / "epoch_1" / "beta.f32").exists()

    def test_sweep_resume_and_conflict(self, small_lab, tmp_path, capsys):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps({"kinds": ["l1", "sernn"], "gammas": [0.0, 0.01], "seeds": 1, "workers": 1}),
                          encoding="utf-8")
        out = tmp_path / "s"
        assert main(["sweep", "--config", str(config), "--out", str(out)]) == EXIT_OK
        metrics = (out / "metrics.csv").read_bytes()
        assert len(pd.read_csv(out / "metrics.csv")) == 2 * 2 * 2

        assert main(["sweep", "--config", str(config), "--out", str(out)]) == EXIT_OK
        assert (out / "metrics.csv").read_bytes() == metrics

        other = tmp_path / "other.json"
        other.write_text(json.dumps({"kinds": ["l1"], "gammas": [0.0], "seeds": 1, "workers": 1}), encoding="utf-8")
        capsys.readouterr()
        assert main(["sweep", "--config", str(other), "--out", str(out)]) == EXIT_USAGE
        assert "--out" in _error_line(capsys)["message"]
        assert main(["sweep", "--config", str(other), "--out", str(out), "--force"]) == EXIT_OK
        assert len(pd.read_csv(out / "metrics.csv")) == 2

    def test_analyze_matches_sweep(self, small_lab, tmp_path):
        config = tmp_path / "sweep.json"
        config.write_text(json.dumps({"kinds": ["space"], "gammas": [0.01], "seeds": 1, "workers": 1}), encoding="utf-8")
        assert main(["sweep", "--config", str(config), "--out", str(tmp_path / "s")]) == EXIT_OK
        out = tmp_path / "m.csv"
        assert main(["analyze", "--runs", str(tmp_path / "s" / "runs"), "--out", str(out)]) == EXIT_OK
        assert out.read_bytes() == (tmp_path / "s" / "metrics.csv").read_bytes()


@pytest.mark.unit
class TestFiguresAndPlot:
    """figures -> plot."""

    def test_pipeline(self, metrics_csv, tmp_path):
        extract = tmp_path / "fig2a.csv"
        svg = tmp_path / "fig2a.svg"
        assert main(["figures", "--metrics", str(metrics_csv), "--which", "fig2a", "--out", str(extract)]) == EXIT_OK
        assert len(pd.read_csv(extract)) == 6
        assert main(["plot", "--in", str(extract), "--out", str(svg)]) == EXIT_OK
        text = svg.read_text(encoding="utf-8")
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
        assert "fig2a" in text and "modularity Q" in text
        assert "<image" not in text

    def test_plot_is_byte_deterministic(self, metrics_csv, tmp_path):
        extract = tmp_path / "fig2c.csv"
        main(["figures", "--metrics", str(metrics_csv), "--which", "fig2c", "--out", str(extract)])
        assert main(["plot", "--in", str(extract), "--out", str(tmp_path / "a.svg")]) == EXIT_OK
        assert main(["plot", "--in", str(extract), "--out", str(tmp_path / "b.svg")]) == EXIT_OK
        assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()

    def test_unknown_figure(self, metrics_csv, tmp_path, capsys):
        code = main(["figures", "--metrics", str(metrics_csv), "--which", "fig9", "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_USAGE
        assert "--which" in _error_line(capsys)["message"]

    def test_weight_figure_without_runs(self, metrics_csv, tmp_path, capsys):
        code = main(["figures", "--metrics", str(metrics_csv), "--which", "fig3c", "--out", str(tmp_path / "x.csv")])
        assert code == EXIT_USAGE
        assert _error_line(capsys)["kind"] == "InvalidInputError"

    def test_unknown_style(self, metrics_csv, tmp_path, capsys):
        code = main(["plot", "--in", str(metrics_csv), "--out", str(tmp_path / "x.svg"), "--style", "pie"])
        assert code == EXIT_USAGE

    def test_missing_input(self, tmp_path):
        assert main(["plot", "--in", str(tmp_path / "none.csv"), "--out", str(tmp_path / "x.svg")]) == EXIT_USAGE


@pytest.mark.unit
class TestRender:
    """render_svg."""

    def test_empty_extract(self):
        svg = render_svg(pd.DataFrame(columns=["figure", "kind", "epoch", "mean"]))
        assert "no data" in svg
        ET.fromstring(svg)

    def test_missing_columns(self):
        with pytest.raises(InvalidInputError):
            render_svg(pd.DataFrame({"figure": ["fig2c"], "kind": ["l1"], "Q": [0.1]}))

    def test_complex_spectrum(self):
        theta = np.linspace(0, np.pi, 6)
        frame = pd.DataFrame({
            "figure": "fig5c", "kind": "sernn", "percent": 10.0, "gamma": 0.01, "seed": 0,
            "re": np.cos(theta) * 0.5, "im": np.sin(theta) * 0.5,
        })
        svg = render_svg(frame)
        assert "Re(lambda)" in svg
        assert "sernn 10%" in svg

    def test_histogram(self):
        frame = pd.DataFrame({
            "figure": "fig3b", "kind": "l1", "gamma": 0.0, "seed": 0,
            "epoch": [1, 1, 2, 2], "bin_left": [0.0, 1.0, 0.0, 1.0], "bin_right": [1.0, 2.0, 1.0, 2.0],
            "count": [1, 3, 2, 2], "fraction": [0.25, 0.75, 0.5, 0.5],
        })
        assert "l1 epoch 2" in render_svg(frame)

    def test_style_override(self):
        frame = pd.DataFrame({"figure": "fig2c", "kind": "l1", "gamma": 0.0, "seed": [0, 1],
                              "Q": [0.1, 0.2], "H_W": [0.5, 0.4]})
        assert render_svg(frame, "line") != render_svg(frame)

    def test_matrix_panels(self):
        n = 3
        rows, cols = np.divmod(np.arange(n * n), n)
        parts = [
            pd.DataFrame({"figure": "fig4b", "kind": kind, "gamma": 0.01, "seed": 0, "epoch": 2,
                          "matrix": name, "row": rows, "col": cols, "value": np.arange(n * n, dtype=float)})
            for kind in ("l1", "sernn") for name in ("W", "C")
        ]
        svg = render_svg(pd.concat(parts, ignore_index=True))
        ET.fromstring(svg)
        assert "<image" not in svg
        assert "sernn |W| (max 8)" in svg
        assert "l1 C (max 8)" in svg
        assert svg == render_svg(pd.concat(parts, ignore_index=True))

    def test_matrix_needs_values(self):
        frame = pd.DataFrame({"figure": "fig4b", "kind": "l1", "row": [0], "col": [0]})
        with pytest.raises(InvalidInputError):
            render_svg(frame)

    def test_log_axis_drops_non_positive(self):
        frame = pd.DataFrame({"figure": "fig5a", "kind": "l1", "gamma": [0.0, 0.1], "seed": 0,
                              "lambda_max": [0.0, 1.5]})
        ET.fromstring(render_svg(frame))


@pytest.mark.unit
class TestSelftestCommand:
    """selftest exit codes."""

    def test_passing_subset(self, capsys):
        assert main(["selftest", "--only", "entropy", "--only", "matrix_exp"]) == EXIT_OK

    def test_unknown_oracle(self, capsys):
        assert main(["selftest", "--only", "nope"]) == EXIT_USAGE

    def test_failure_exit_code(self, capsys):
        @register_oracle("always_fails")
        class AlwaysFails(BaseOracle):
            def run(self) -> OracleResult:
                return OracleResult(name=self.name, passed=False, max_error=1.0, tolerance=0.0)

        try:
            assert main(["selftest", "--only", "always_fails"]) == EXIT_SELFTEST
        finally:
            _ORACLE_REGISTRY.pop("always_fails", None)

    @pytest.mark.integration
    def test_full_suite(self, capsys):
        assert main(["selftest"]) == EXIT_OK
