"""Tests for the command-line interface: dispatch, overrides, exit codes."""

import json
import math
import os

import numpy as np
import pytest

import kgmti.cli as cli
from kgmti.cli import main


def run_cli(argv):
    return main(argv)


class TestSolveCommand:
    def test_small_solve_exit_zero(self, tmp_path, capsys):
        out = str(tmp_path / "s")
        rc = run_cli(["solve", "--eps", "0.5", "--h", "1", "--tau", "0.05",
                      "--t-end", "0.1", "--out", out])
        assert rc == 0
        printed = capsys.readouterr().out.strip().split("\n")
        assert all(os.path.exists(p) for p in printed)
        assert any(p.endswith("solve_eps0.5.csv") for p in printed)

    def test_multiple_eps_runs(self, tmp_path):
        out = str(tmp_path / "s")
        rc = run_cli(["solve", "--eps", "1,0.5", "--h", "1", "--tau", "0.05",
                      "--t-end", "0.05", "--out", out])
        assert rc == 0
        assert os.path.exists(os.path.join(out, "solve_eps1.csv"))
        assert os.path.exists(os.path.join(out, "solve_eps0.5.csv"))


class TestConfigHandling:
    def test_config_file_with_flag_override(self, tmp_path, capsys):
        doc = {
            "problem": {"name": "sech-gauss"},
            "sweep": {"eps": [0.5], "h": [1.0], "tau": [0.1, 0.05], "T": 0.4},
            "reference": {"tau_ref": 0.005},
            "outputs": {"directory": str(tmp_path / "cfg_out")},
        }
        cfg_path = tmp_path / "exp.json"
        cfg_path.write_text(json.dumps(doc))
        rc = run_cli(["table-temporal", "--config", str(cfg_path),
                      "--t-end", "0.2"])  # flag overrides the file's T
        assert rc == 0
        capsys.readouterr()
        meta = json.load(open(tmp_path / "cfg_out" / "table_temporal.json"))
        assert float(meta["metadata"]["T"]) == 0.2

    def test_invalid_config_exit_2_with_report(self, tmp_path, capsys):
        rc = run_cli(["solve", "--eps", "-1", "--out", str(tmp_path / "x")])
        assert rc == 2
        report = json.loads(capsys.readouterr().err)
        assert report["status"] == "failure" and report["kind"] == "config"
        assert any("positive" in e for e in report["errors"])

    def test_missing_config_file_exit_2(self, tmp_path, capsys):
        rc = run_cli(["solve", "--config", str(tmp_path / "nope.json")])
        assert rc == 2
        assert json.loads(capsys.readouterr().err)["kind"] == "config"

    def test_unknown_problem_exit_2(self, tmp_path, capsys):
        rc = run_cli(["solve", "--problem", "no-such", "--out", str(tmp_path / "x")])
        assert rc == 2
        report = json.loads(capsys.readouterr().err)
        assert any("unknown problem" in e for e in report["errors"])

    def test_defaults_documented_scale(self):
        ns = cli.build_parser().parse_args(["table-temporal"])
        cfg = cli.config_from_args(ns)
        assert len(cfg.eps_list) == 14 and cfg.eps_list[0] == 0.5
        assert cfg.tau_list[0] == 0.2 and len(cfg.tau_list) == 5
        assert cfg.tau_ref == 1e-5 and cfg.t_end == 1.0


class TestFinitenessGate:
    def test_non_finite_results_exit_1(self, tmp_path, capsys, monkeypatch):
        real = cli.cmd_solve

        def poisoned(cfg, eps=None):
            res = real(cfg, eps=eps)
            res.energy_drift = float("nan")
            return res

        monkeypatch.setattr(cli, "cmd_solve", poisoned)
        rc = run_cli(["solve", "--eps", "0.5", "--h", "1", "--tau", "0.05",
                      "--t-end", "0.05", "--out", str(tmp_path / "x")])
        assert rc == 1
        report = json.loads(capsys.readouterr().err)
        assert report["kind"] == "runtime"
        assert any("non-finite" in e for e in report["errors"])


class TestCoeffDump:
    def test_table_csv(self, tmp_path, capsys):
        out = str(tmp_path / "c")
        rc = run_cli(["coeff-dump", "--tau", "0.1", "--eps", "0.5",
                      "--h", "1", "--out", out])
        assert rc == 0
        lines = open(os.path.join(out, "coeff_table.csv")).read().strip().split("\n")
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        cols = lines[header_idx].split(",")
        assert cols[:5] == ["l", "mu", "omega", "lambda_plus", "lambda_minus"]
        assert "a_re" in cols and "p_prime_im" in cols and len(cols) == 21
        rows = [l.split(",") for l in lines[header_idx + 1:]]
        assert len(rows) == 32
        ls = [int(r[0]) for r in rows]
        assert sorted(ls) == list(range(-16, 16))
        eps = 0.5
        for r in rows:
            mu = float(r[1])
            lam_p, lam_m = float(r[3]), float(r[4])
            assert lam_p <= -2.0 / eps**2 + 1e-12
            assert -1e-12 <= lam_m <= mu * mu / 2.0 + 1e-12
            assert math.isclose(float(r[2]),
                                math.sqrt(1.0 + (eps * mu) ** 2) / eps**2,
                                rel_tol=1e-12)

    def test_rejects_2d_problem(self, capsys, tmp_path):
        rc = run_cli(["coeff-dump", "--problem", "twin-gauss-2d", "--h", "1.25",
                      "--out", str(tmp_path / "c")])
        assert rc == 2
        assert "1D" in capsys.readouterr().err


class TestParser:
    def test_bad_float_list_rejected(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args(["solve", "--eps", "0.5,abc"])

    def test_format_flag_restricts_outputs(self, tmp_path):
        out = str(tmp_path / "f")
        rc = run_cli(["table-temporal", "--eps", "0.5", "--h", "1",
                      "--tau", "0.1,0.05", "--ref-tau", "0.005",
                      "--t-end", "0.2", "--format", "json", "--out", out])
        assert rc == 0
        files = os.listdir(out)
        assert "table_temporal.json" in files
        assert "table_temporal.csv" not in files
