import io
import json
import subprocess
import sys

import numpy as np
import pytest

import lsqflow as lf
from lsqflow.cli import build_parser, error_envelope, run

from conftest import fixture_path, load_fixture


def invoke(config_name, out_dir):
    """In-process driver mirroring the console entry point."""
    cfg = load_fixture(config_name)
    out = io.StringIO()
    err = io.StringIO()
    code = run(cfg, out_dir=str(out_dir), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "lsqflow", *args],
                          capture_output=True, text=True, cwd=cwd)


class TestAnalyzeMode:
    def test_payload_shape(self, tmp_path):
        code, out, err = invoke("chain4_analyze.json", tmp_path)
        assert code == 0 and err == ""
        payload = json.loads(out)
        cond = payload["condition"]
        assert cond["holds"] is True
        assert cond["method"] == "both"
        assert cond["witness"] is None
        spect = payload["spectral"]
        assert len(spect["m_eigenvalues"]) == 16
        assert all(len(pair) == 2 for pair in spect["m_eigenvalues"])
        assert abs(spect["epsilon_star"] - 0.0362) < 5e-4
        assert spect["zero_space_dim"] == 2
        W = np.array(spect["projector_W"])
        assert W.shape == (8, 8)
        assert np.abs(W @ W - W).max() < 1e-8

    def test_out_json_written(self, tmp_path):
        invoke("chain4_analyze.json", tmp_path)
        saved = json.loads((tmp_path / "chain4_analyze.json").read_text())
        assert saved["condition"]["holds"] is True

    def test_failing_graph_reports_witness(self, tmp_path):
        code, out, _ = invoke("star4_analyze.json", tmp_path)
        assert code == 0
        payload = json.loads(out)
        cond = payload["condition"]
        assert cond["holds"] is False
        assert cond["witness"] is not None
        assert cond["witness_support"] == [2, 3]
        assert payload["spectral"]["projector_W"] is None


class TestSolveMode:
    def test_solution_payload(self, tmp_path):
        code, out, _ = invoke("chain4_lsq.json", tmp_path)
        assert code == 0
        payload = json.loads(out)
        assert abs(payload["y_star"][0] - (-1.0 / 7.0)) < 1e-12
        assert abs(payload["y_star"][1] - (-1.0)) < 1e-12
        assert abs(payload["objective"] - 54.0 / 7.0) < 1e-12
        assert len(payload["residual"]) == 4


class TestEpsilonStarMode:
    def test_scalar_on_stdout(self, tmp_path):
        code, out, _ = invoke("chain4_epsilon.json", tmp_path)
        assert code == 0
        assert abs(float(out.strip()) - 0.0362) < 5e-4


class TestFeasibilityMode:
    def test_table_layout(self, tmp_path):
        code, out, _ = invoke("families_feasibility.json", tmp_path)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].split() == ["family", "n", "min_support", "closed_form"]
        assert len(lines) == 1 + 26
        by_key = {tuple(ln.split()[:2]): ln.split()[2:] for ln in lines[1:]}
        assert by_key[("star", "7")] == ["2", "2"]
        assert by_key[("path", "8")] == ["8", "8"]
        # the catalog misses the true ring-12 value; both columns shown
        assert by_key[("ring", "12")] == ["6", "8"]

    def test_out_json_rows(self, tmp_path):
        invoke("families_feasibility.json", tmp_path)
        rows = json.loads((tmp_path / "families_feasibility.json").read_text())["rows"]
        assert {"family": "ring", "n": 12, "min_support": 6,
                "closed_form": 8} in rows
        assert len(rows) == 26


class TestSimulationModes:
    def test_ct_writes_csv_and_svg(self, tmp_path):
        code, out, _ = invoke("chain4_ct.json", tmp_path)
        assert code == 0
        csv = (tmp_path / "chain4_ct.csv").read_text().splitlines()
        assert csv[0].startswith("t,x_1_1")
        assert len(csv) == 1 + 4001  # header plus every 10th of 40000 steps
        svg = (tmp_path / "chain4_ct.svg").read_text()
        assert svg.count("<polyline") == 8
        assert svg.startswith("<svg") or "<svg" in svg

    def test_divergence_exit_code_and_partial_artifacts(self, tmp_path):
        code, out, err = invoke("chain4_dt_step004.json", tmp_path)
        assert code == 2
        envelope = json.loads(err)
        assert envelope["error"] == "DivergedError"
        details = envelope["details"]
        assert details["t_or_k"] > 0
        assert set(details["bad_components"]) <= set(
            lf.component_names(4, 2))
        csv = (tmp_path / "chain4_dt_step004.csv").read_text().splitlines()
        last = np.array([float(v) for v in csv[-1].split(",")])
        assert (~np.isfinite(last[1:17])).any() or np.abs(last[1:17]).max() > 1e9

    def test_repeated_runs_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        invoke("chain4_dt_step003.json", a)
        invoke("chain4_dt_step003.json", b)
        fa = (a / "chain4_dt_step003.csv").read_bytes()
        fb = (b / "chain4_dt_step003.csv").read_bytes()
        assert fa == fb

    def test_switching_run_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        invoke("pent3d_switch_T010.json", a)
        invoke("pent3d_switch_T010.json", b)
        assert (a / "pent3d_switch_T010.csv").read_bytes() == \
            (b / "pent3d_switch_T010.csv").read_bytes()
        assert (a / "pent3d_switch_T010.svg").read_bytes() == \
            (b / "pent3d_switch_T010.svg").read_bytes()


class TestErrorEnvelopes:
    def test_schema_error_envelope(self):
        try:
            lf.parse_config('{"mode": "simulate-dt"}')
        except lf.SchemaError as exc:
            env = error_envelope(exc)
        assert env["error"] == "SchemaError"
        assert ["epsilon", "required"] in [list(v) for v in env["details"]["violations"]]

    def test_parse_error_envelope(self):
        try:
            lf.parse_config("{bad json")
        except lf.ConfigParseError as exc:
            env = error_envelope(exc)
        assert env["error"] == "ConfigParseError"
        assert env["details"]["line"] == 1


class TestCommandLine:
    def test_parser_covers_all_modes(self):
        parser = build_parser()
        for mode in lf.MODES:
            ns = parser.parse_args([mode, "--config", "c.json"])
            assert ns.mode == mode

    def test_end_to_end_solve(self, tmp_path):
        res = cli("solve-lsq", "--config", str(fixture_path("chain4_lsq.json")),
                  "--out", str(tmp_path))
        assert res.returncode == 0
        assert abs(json.loads(res.stdout)["y_star"][1] + 1.0) < 1e-12

    def test_end_to_end_epsilon_star(self, tmp_path):
        res = cli("epsilon-star", "--config", str(fixture_path("chain4_epsilon.json")),
                  "--out", str(tmp_path))
        assert res.returncode == 0
        assert abs(float(res.stdout.strip()) - 0.0362) < 5e-4

    def test_mode_mismatch_is_schema_error(self, tmp_path):
        res = cli("analyze", "--config", str(fixture_path("chain4_lsq.json")),
                  "--out", str(tmp_path))
        assert res.returncode == 1
        env = json.loads(res.stderr)
        assert env["error"] == "SchemaError"
        assert any("mode" == p for p, _ in env["details"]["violations"])

    def test_missing_config_file(self, tmp_path):
        res = cli("analyze", "--config", str(tmp_path / "ghost.json"))
        assert res.returncode == 1
        assert json.loads(res.stderr)["error"] in ("FileNotFoundError", "OSError")

    def test_malformed_config_reports_position(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"mode": "analyze",\n  "problem": }')
        res = cli("analyze", "--config", str(bad))
        assert res.returncode == 1
        env = json.loads(res.stderr)
        assert env["error"] == "ConfigParseError"
        assert env["details"]["line"] == 2

    def test_divergence_exit_code_two(self, tmp_path):
        res = cli("simulate-dt", "--config",
                  str(fixture_path("chain4_dt_step004.json")),
                  "--out", str(tmp_path))
        assert res.returncode == 2
        assert json.loads(res.stderr)["error"] == "DivergedError"
        assert (tmp_path / "chain4_dt_step004.csv").exists()

    def test_plot_override_series_list(self, tmp_path):
        res = cli("simulate-dt", "--config",
                  str(fixture_path("chain4_dt_step003.json")),
                  "--out", str(tmp_path), "--plot", "error,cost")
        assert res.returncode == 0
        svg = (tmp_path / "plot.svg").read_text()
        assert svg.count("<polyline") == 2

    def test_plot_override_inline_json(self, tmp_path):
        spec = json.dumps({"series": ["x_1_1"], "path": "states.svg"})
        res = cli("simulate-dt", "--config",
                  str(fixture_path("chain4_dt_step003.json")),
                  "--out", str(tmp_path), "--plot", spec)
        assert res.returncode == 0
        assert (tmp_path / "states.svg").exists()
