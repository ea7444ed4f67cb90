"""CLI: config parsing, command outputs, exit codes, reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from sftreturns.cli import EXIT_CONFIG, EXIT_DOMAIN, EXIT_OK, EXIT_VALIDATION, main


def full2_config(**overrides):
    cfg = {
        "system": {
            "n_symbols": 2,
            "transitions": [[1, 1], [1, 1]],
            "potential": {"depth": 1, "values": [{"word": [0], "value": 0.0}, {"word": [1], "value": 0.0}]},
            "target": [0],
        },
        "alpha_grid": {"min": -2.0, "max": 0.4, "count": 9},
        "u_grid": {"min": 1.2, "max": 4.0, "count": 8},
        "simulation": {
            "seed": 20240817,
            "n_returns": 12,
            "n_samples": 4000,
            "horizon": 600,
            "workers": 1,
            "tails": [{"u": 0.8, "side": "upper"}],
        },
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path: Path, cfg: dict, name: str = "config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def run(args):
    return main([str(a) for a in args])


class TestConfigErrors:
    def test_missing_file(self, tmp_path):
        assert run(["analyze", "--config", tmp_path / "nope.json"]) == EXIT_CONFIG

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert run(["analyze", "--config", path]) == EXIT_CONFIG

    def test_row_length_cites_index(self, tmp_path, capsys):
        cfg = full2_config()
        cfg["system"]["transitions"] = [[1, 1], [1]]
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_CONFIG
        assert "row 1" in capsys.readouterr().err

    def test_nan_potential_rejected(self, tmp_path):
        cfg = full2_config()
        cfg["system"]["potential"]["values"][0]["value"] = float("nan")
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_CONFIG

    def test_improper_target_rejected(self, tmp_path):
        cfg = full2_config()
        cfg["system"]["target"] = [0, 1]
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_CONFIG

    def test_degenerate_system_is_numeric_failure(self, tmp_path):
        # pure 2-cycle: deterministic returns, variance not strictly positive
        cfg = full2_config()
        cfg["system"]["transitions"] = [[0, 1], [1, 0]]
        path = write_config(tmp_path, cfg)
        from sftreturns.cli import EXIT_NUMERIC

        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_NUMERIC

    def test_default_potential_notice(self, tmp_path):
        cfg = full2_config()
        cfg["system"]["potential"]["values"] = []
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        assert any("defaulted" in note for note in report["notices"])


class TestAnalyze:
    def test_scalars_match_closed_forms(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        scalars = report["scalars"]
        assert scalars["pressure"]["value"] == pytest.approx(np.log(2.0), abs=1e-12)
        assert scalars["alpha0"]["value"] == pytest.approx(np.log(2.0), abs=1e-12)
        assert scalars["mu_target"]["value"] == pytest.approx(0.5, abs=1e-12)
        assert scalars["sigma2"]["value"] == pytest.approx(2.0, abs=1e-9)
        assert scalars["minimal_return_time"]["value"] == 1

    def test_csv_schemas(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        run(["analyze", "--config", path, "--out", tmp_path])
        scgf_lines = (tmp_path / "scgf.csv").read_text().strip().splitlines()
        assert scgf_lines[0] == "alpha,psi,psi1,psi2"
        assert len(scgf_lines) == 10
        first = scgf_lines[1].split(",")
        assert len(first) == 4
        assert float(first[1]) == pytest.approx(-2.0 - np.log(2.0 - np.exp(-2.0)), abs=1e-12)
        rate_lines = (tmp_path / "rate.csv").read_text().strip().splitlines()
        assert rate_lines[0] == "u,rate,alpha_star"

    def test_seventeen_digit_floats(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        run(["analyze", "--config", path, "--out", tmp_path])
        row = (tmp_path / "scgf.csv").read_text().strip().splitlines()[1].split(",")
        value = float(row[1])
        assert f"{value:.17g}" == row[1]

    def test_grid_beyond_alpha0_is_domain_error(self, tmp_path, capsys):
        cfg = full2_config()
        cfg["alpha_grid"] = {"min": 0.0, "max": 0.8, "count": 5}
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path]) == EXIT_DOMAIN
        assert "0.8" in capsys.readouterr().err

    def test_clip_grid_records_notice(self, tmp_path):
        cfg = full2_config()
        cfg["alpha_grid"] = {"min": 0.0, "max": 0.8, "count": 5}
        path = write_config(tmp_path, cfg)
        assert run(["analyze", "--config", path, "--out", tmp_path, "--clip-grid"]) == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        assert any("clipped" in n for n in report["notices"])
        lines = (tmp_path / "scgf.csv").read_text().strip().splitlines()
        assert len(lines) < 6


class TestSimulationCommands:
    def test_simulate_writes_histogram(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        assert run(["simulate", "--config", path, "--out", tmp_path]) == EXIT_OK
        lines = (tmp_path / "returns_hist.csv").read_text().strip().splitlines()
        assert lines[0] == "value,count"
        total = sum(int(line.split(",")[1]) for line in lines[1:])
        assert total == 4000

    def test_clt_outputs(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        assert run(["clt", "--config", path, "--out", tmp_path]) == EXIT_OK
        lines = (tmp_path / "clt.csv").read_text().strip().splitlines()
        assert lines[0] == "t,empirical_cdf,normal_cdf"
        assert len(lines) == 402
        report = json.loads((tmp_path / "report.json").read_text())
        assert 0.0 <= report["clt"]["ks_statistic"] <= 1.0

    def test_samples_override(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        run(["simulate", "--config", path, "--out", tmp_path, "--samples", "500"])
        lines = (tmp_path / "returns_hist.csv").read_text().strip().splitlines()
        total = sum(int(line.split(",")[1]) for line in lines[1:])
        assert total == 500


class TestValidate:
    def test_passes_on_full2(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        assert run(["validate", "--config", path, "--out", tmp_path]) == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        verdicts = {v["name"]: v for v in report["verdicts"]}
        assert all(v["passed"] for v in verdicts.values())
        assert "lambda_at_pressure" in verdicts
        assert "variance_two_routes" in verdicts
        assert any(v["kind"] == "stochastic" for v in report["verdicts"])
        for name in ("scgf.csv", "rate.csv", "clt.csv", "tails.csv"):
            assert (tmp_path / name).exists()

    def test_byte_identical_reruns_and_worker_invariance(self, tmp_path):
        cfg = full2_config()
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        out3 = tmp_path / "run3"
        path = write_config(tmp_path, cfg)
        cfg_workers = full2_config()
        cfg_workers["simulation"]["workers"] = 4
        path_workers = write_config(tmp_path, cfg_workers, name="workers.json")
        assert run(["validate", "--config", path, "--out", out1]) == EXIT_OK
        assert run(["validate", "--config", path, "--out", out2]) == EXIT_OK
        assert run(["validate", "--config", path_workers, "--out", out3]) == EXIT_OK
        for name in ("scgf.csv", "rate.csv", "clt.csv", "tails.csv"):
            ref = (out1 / name).read_bytes()
            assert (out2 / name).read_bytes() == ref
            assert (out3 / name).read_bytes() == ref

    def test_seed_override_changes_stochastic_but_not_verdicts(self, tmp_path):
        path = write_config(tmp_path, full2_config())
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert run(["validate", "--config", path, "--out", out1]) == EXIT_OK
        assert run(["validate", "--config", path, "--out", out2, "--seed", "999"]) == EXIT_OK
        assert (out1 / "tails.csv").read_bytes() != (out2 / "tails.csv").read_bytes()
        assert (out1 / "scgf.csv").read_bytes() == (out2 / "scgf.csv").read_bytes()

    def test_golden_mean_validates(self, tmp_path):
        cfg = {
            "system": {
                "n_symbols": 2,
                "transitions": [[1, 1], [1, 0]],
                "potential": {"depth": 1, "values": []},
                "target": [1],
            },
            "simulation": {"seed": 7, "n_returns": 10, "n_samples": 4000, "horizon": 500,
                           "tails": [{"u": 1.0, "side": "upper"}]},
        }
        path = write_config(tmp_path, cfg)
        assert run(["validate", "--config", path, "--out", tmp_path]) == EXIT_OK
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["scalars"]["minimal_return_time"]["value"] == 2
