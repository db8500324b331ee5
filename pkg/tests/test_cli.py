import json

import numpy as np
import pytest

from grafhub.cli import main
from grafhub.io import read_labels_csv, read_signals_csv


def run_synth(tmp_path, name="inst", **overrides):
    out = tmp_path / name
    args = {
        "--model": "ER",
        "--n": "120",
        "--p": "0.1",
        "--signals": "20",
        "--u": "4",
        "--seed": "7",
        "--out": str(out),
    }
    for key, value in overrides.items():
        args["--" + key.lstrip("-").replace("_", "-")] = str(value)
    argv = ["synth"] + [item for pair in args.items() for item in pair]
    assert main(argv) == 0
    return out


class TestSynth:
    def test_writes_all_files(self, tmp_path):
        out = run_synth(tmp_path)
        for name in (
            "graph.csv",
            "signals.csv",
            "clean_signals.csv",
            "labels.csv",
            "config.json",
            "manifest.json",
        ):
            assert (out / name).is_file()
        labels = read_labels_csv(out / "labels.csv")
        assert labels.sum() == 12  # round(0.1 * 120)

    def test_same_seed_byte_identical(self, tmp_path):
        a = run_synth(tmp_path, "a")
        b = run_synth(tmp_path, "b")
        for name in ("graph.csv", "signals.csv", "labels.csv", "config.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_invalid_hub_fraction_exits_2(self, tmp_path, capsys):
        code = main(
            ["synth", "--hub-fraction", "1.5", "--out", str(tmp_path / "bad")]
        )
        assert code == 2
        assert "hub_fraction" in capsys.readouterr().err

    def test_manifest_echoes_config(self, tmp_path):
        out = run_synth(tmp_path)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["subcommand"] == "synth"
        assert manifest["config"]["n_nodes"] == 120
        assert manifest["config"]["seed"] == 7


class TestDetect:
    def test_end_to_end_recall(self, tmp_path):
        inst = run_synth(tmp_path)
        out = tmp_path / "det"
        code = main(
            [
                "detect",
                "--graph", str(inst / "graph.csv"),
                "--signals", str(inst / "signals.csv"),
                "--alpha", "1.0",
                "--select", "topk",
                "--k", "12",
                "--out", str(out),
            ]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        truth = set(np.flatnonzero(read_labels_csv(inst / "labels.csv")))
        for metric in ("reconstruction_error", "smoothness"):
            found = set(report["metrics"][metric]["hub_set"])
            assert len(found & truth) / len(truth) >= 0.8
        # filter response is reported per eigenvalue
        assert len(report["filter_response"]) == 120
        # filtered + residual reconstruct the input
        filtered = read_signals_csv(out / "filtered.csv")
        residual = read_signals_csv(out / "residual.csv")
        signals = read_signals_csv(inst / "signals.csv")
        np.testing.assert_allclose(filtered + residual, signals, atol=1e-9)

    def test_topk_all_nodes(self, tmp_path):
        inst = run_synth(tmp_path, n=60, signals=10)
        out = tmp_path / "det_all"
        assert main(
            [
                "detect",
                "--graph", str(inst / "graph.csv"),
                "--signals", str(inst / "signals.csv"),
                "--select", "topk",
                "--k", "60",
                "--out", str(out),
            ]
        ) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["metrics"]["smoothness"]["hub_set"] == list(range(60))

    def test_missing_file_exits_2_with_path(self, tmp_path, capsys):
        code = main(
            [
                "detect",
                "--graph", str(tmp_path / "nope.csv"),
                "--signals", str(tmp_path / "nope2.csv"),
                "--out", str(tmp_path / "x"),
            ]
        )
        assert code == 2
        assert "nope.csv" in capsys.readouterr().err

    def test_dimension_mismatch_exits_2(self, tmp_path, capsys):
        inst = run_synth(tmp_path, n=60, signals=5)
        other = run_synth(tmp_path, "other", n=50, signals=5)
        code = main(
            [
                "detect",
                "--graph", str(inst / "graph.csv"),
                "--signals", str(other / "signals.csv"),
                "--out", str(tmp_path / "mm"),
            ]
        )
        assert code == 2
        assert "mismatch" in capsys.readouterr().err


class TestBaseline:
    def test_degree_scores(self, tmp_path):
        inst = run_synth(tmp_path, n=60, signals=5)
        out = tmp_path / "deg"
        assert main(
            ["baseline", "--method", "degree", "--graph", str(inst / "graph.csv"),
             "--out", str(out)]
        ) == 0
        scores = json.loads((out / "scores.json").read_text())["scores"]
        assert len(scores) == 60

    def test_missing_required_input_exits_2(self, tmp_path, capsys):
        code = main(["baseline", "--method", "lof", "--out", str(tmp_path / "x")])
        assert code == 2
        assert "--signals" in capsys.readouterr().err

    def test_signal_method(self, tmp_path):
        inst = run_synth(tmp_path, n=60, signals=8)
        out = tmp_path / "lof"
        assert main(
            ["baseline", "--method", "lof", "--signals", str(inst / "signals.csv"),
             "--k", "10", "--out", str(out)]
        ) == 0
        assert (out / "scores.csv").is_file()


class TestBench:
    def test_small_bench_writes_csvs(self, tmp_path):
        grid = {
            "base": {"n_nodes": 50, "er_p": 0.15, "n_signals": 8},
            "models": ["ER"],
            "u_values": [2.0],
            "methods": ["degree", "lof"],
            "n_runs": 2,
            "alpha_grid": [1.0],
            "order_grid": [2],
            "seed": 1,
        }
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(json.dumps(grid))
        out = tmp_path / "bench"
        assert main(
            ["bench", "--experiment", "1", "--grid", str(grid_path), "--out", str(out)]
        ) == 0
        summary = (out / "experiment1_ER_summary.csv").read_text()
        assert summary.startswith("method,x_value,mean_auc")
        runs = (out / "experiment1_ER_runs.csv").read_text().strip().splitlines()
        assert len(runs) == 1 + 2 * 2  # header + 2 methods x 2 runs

    def test_bench_rerun_identical(self, tmp_path):
        grid = {
            "base": {"n_nodes": 40, "er_p": 0.2, "n_signals": 6},
            "models": ["ER"],
            "u_values": [2.0],
            "methods": ["lof"],
            "n_runs": 2,
            "seed": 3,
        }
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(json.dumps(grid))
        outs = []
        for name in ("b1", "b2"):
            out = tmp_path / name
            assert main(
                ["bench", "--experiment", "2", "--grid", str(grid_path),
                 "--out", str(out)]
            ) == 0
            outs.append((out / "experiment2_ER_runs.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_bad_grid_exits_2(self, tmp_path, capsys):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(json.dumps({"n_runs": 0}))
        assert main(
            ["bench", "--experiment", "1", "--grid", str(grid_path),
             "--out", str(tmp_path / "x")]
        ) == 2
        assert "grid" in capsys.readouterr().err


class TestAnalyze:
    def test_sed_and_knockout(self, tmp_path):
        inst = run_synth(tmp_path, model="BAdegree", n=100)
        det = tmp_path / "det"
        assert main(
            ["detect", "--graph", str(inst / "graph.csv"),
             "--signals", str(inst / "signals.csv"),
             "--select", "topk", "--k", "10", "--out", str(det)]
        ) == 0
        out = tmp_path / "ana"
        counts_path = tmp_path / "counts.csv"
        counts_path.write_text("1,1,2\n")
        assert main(
            ["analyze", "--graph", str(inst / "graph.csv"),
             "--signals", str(inst / "signals.csv"),
             "--report", str(det / "report.json"),
             "--counts", str(counts_path),
             "--out", str(out)]
        ) == 0
        diag = json.loads((out / "diagnostics.json").read_text())
        assert sum(diag["sed"]["sed"]) == pytest.approx(1.0, abs=1e-8)
        assert diag["knockout"]["hub_nodes"]
        assert diag["normalized_entropy"] == pytest.approx(
            1.5 / np.log2(3), abs=1e-10
        )

    def test_no_report_gives_empty_knockout(self, tmp_path):
        inst = run_synth(tmp_path, n=60, signals=5)
        out = tmp_path / "ana2"
        assert main(
            ["analyze", "--graph", str(inst / "graph.csv"),
             "--signals", str(inst / "signals.csv"), "--out", str(out)]
        ) == 0
        diag = json.loads((out / "diagnostics.json").read_text())
        assert diag["knockout"] == {}
        assert sum(diag["sed"]["sed"]) == pytest.approx(1.0, abs=1e-8)
