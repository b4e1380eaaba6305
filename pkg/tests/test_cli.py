"""Command line surface: exit codes, report layout and deterministic JSON output."""

import math

import numpy as np
import pytest

from gosphere.app import main
from gosphere.controllers.curvature.controller import triangle_points
from gosphere.models.presentation.model import SpaceName
from gosphere.models.report.model import ExitCode
from gosphere.routes.cli import run_command
from gosphere.utils.response import read_json


class TestExitCodes:
    def test_classify_go_space_passes(self):
        report, code = run_command(["classify", "--space", "sp_u1", "--samples", "12", "--norms", "1"])
        assert code == ExitCode.PASS
        rows = report.data["rows"]
        assert len(rows) == 1
        assert rows[0]["verdict"] == "PASS"
        assert report.data["all_match_expected"]

    def test_generic_sp_norm_fails_the_verdict(self):
        report, code = run_command(["go-check", "--space", "sp", "--generic", "--samples", "24"])
        assert code == ExitCode.VERDICT_FAILED
        assert report.data["result"]["verdict"] == "FAIL"

    @pytest.mark.parametrize("argv", [
        ["frobnicate"],
        ["go-check", "--samples", "8"],
        ["classify", "--space", "sl"],
        ["navigate", "--epsilon", "fast"],
    ])
    def test_usage_errors(self, argv):
        report, code = run_command(argv)
        assert code == ExitCode.USAGE_ERROR
        assert report.to_dict()["error"]["code"] == "USAGE_ERROR"

    def test_exceptional_space_is_out_of_scope(self):
        report, code = run_command(["algebra-build", "--space", SpaceName.EXCEPTIONAL[0]])
        assert code == ExitCode.USAGE_ERROR
        assert report.to_dict()["error"]["code"] == "OUT_OF_SCOPE"

    def test_invalid_sample_count(self):
        report, code = run_command(["go-check", "--space", "sp_u1", "--samples", "0"])
        assert code == ExitCode.USAGE_ERROR
        assert report.error["code"] == "VALIDATION_ERROR"

    def test_main_prints_the_text_report(self, capsys):
        assert main(["algebra-build", "--space", "so", "--n", "4"]) == ExitCode.PASS
        out = capsys.readouterr().out
        assert out.startswith("gosphere algebra-build: PASS")
        assert "dim_m: 3" in out


class TestNormCheck:
    def test_alpha12_norm(self):
        report, code = run_command(["norm-check", "--family", "alpha12", "--dim", "7", "--blocks", "3,4",
                                    "--f-expr", "sqrt(s1+2*s2)", "--samples", "16"])
        assert code == ExitCode.PASS
        assert report.data["strongly_convex"]
        assert report.data["reversible"]
        assert report.data["homogeneity_defect"] < 1e-10

    def test_randers_with_large_beta_fails(self):
        report, code = run_command(["norm-check", "--family", "randers", "--dim", "2", "--beta", "1.2,0",
                                    "--samples", "16"])
        assert code == ExitCode.VERDICT_FAILED
        assert not report.data["strongly_convex"]
        assert len(report.data["witness"]) == 2

    def test_norm_is_required(self):
        report, code = run_command(["norm-check"])
        assert code == ExitCode.USAGE_ERROR
        assert report.error["code"] == "VALIDATION_ERROR"

    def test_malformed_expression(self):
        report, code = run_command(["norm-check", "--family", "alpha12", "--dim", "4", "--blocks", "2,2",
                                    "--f-expr", "sqrt(s1+"])
        assert code == ExitCode.USAGE_ERROR
        assert report.error["code"] == "EXPRESSION_SYNTAX"


class TestReports:
    def test_json_report_is_deterministic(self, tmp_path):
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        argv = ["go-check", "--space", "sp_u1", "--samples", "10", "--seed", "5"]
        run_command(argv + ["--json", str(first)])
        run_command(argv + ["--json", str(second)])
        assert first.read_bytes() == second.read_bytes()

        report = read_json(str(first))
        assert report["command"] == "go-check"
        assert report["success"] is True
        assert report["seed"] == 5
        assert {"schema", "config", "data"} <= set(report)
        assert "timings" not in report

    def test_timings_are_opt_in(self):
        report, _ = run_command(["algebra-build", "--space", "su", "--n", "3", "--timings"])
        assert report.to_dict()["timings"]["total_seconds"] >= 0.0

    def test_unwritable_json_path(self, tmp_path):
        target = tmp_path / "missing" / "report.json"
        report, code = run_command(["algebra-build", "--space", "so", "--n", "3", "--json", str(target)])
        assert code == ExitCode.USAGE_ERROR
        assert report.error["code"] == "IO_ERROR"

    def test_navigate_report(self, tmp_path):
        csv_path = tmp_path / "curve.csv"
        report, code = run_command(["navigate", "--sphere", "2", "--field", "rotation", "--epsilon", "0.3",
                                    "--samples", "40", "--csv", str(csv_path)])
        assert code == ExitCode.PASS, report.data
        assert report.data["correspondence_error"] < 1e-9
        assert report.data["transport"]["csv_rows"] > 0
        assert csv_path.read_text().splitlines()[0].startswith("t,chart,x1")

    def test_navigate_skips_transport_for_non_killing_fields(self):
        report, _ = run_command(["navigate", "--sphere", "2", "--field", "0; 0; 0.5", "--epsilon", "0.3",
                                 "--samples", "20"])
        assert report.data["transport"] is None
        assert report.data["killing_defect"]["base"] > 1e-3

    @pytest.mark.slow
    def test_tune_epsilon_recovers_planted_value(self):
        report, code = run_command(["tune-epsilon", "--sphere", "3", "--field", "hopf", "--epsilon", "0.3"])
        assert code == ExitCode.PASS
        assert report.data["planted_error"] < 1e-6

    @pytest.mark.slow
    def test_tune_epsilon_antipodal_map(self):
        report, code = run_command(["tune-epsilon", "--sphere", "3", "--field", "hopf", "--epsilon", "0.3",
                                    "--antipodal"])
        assert code == ExitCode.PASS
        antipodal = report.data["antipodal"]
        assert max(record["psi_squared_error"] for record in antipodal["tuned"]) < 1e-3
        assert max(record["spread"] for record in antipodal["untuned"]) > 1e-3
        assert all(record["psi_distance"] is None for record in antipodal["tuned"])


class TestCurvatureCommands:
    @pytest.mark.slow
    def test_flag_preserves_curvature(self):
        report, code = run_command(["flag", "--sphere", "2", "--field", "rotation", "--epsilon", "0.3",
                                    "--flags", "10", "--critical", "1,0,0"])
        assert code == ExitCode.PASS
        assert report.data["preservation"]["passed"]
        assert report.data["unit_curvature"]["max_error"] < 5e-4
        assert report.data["critical_point"]["gradient_norm"] < 1e-6

    @pytest.mark.slow
    @pytest.mark.parametrize("epsilon, reversible", [("0", True), ("0.3", False)])
    def test_distances(self, epsilon, reversible):
        report, code = run_command(["distances", "--sphere", "2", "--epsilon", epsilon, "--directions", "360"])
        assert code == ExitCode.PASS
        data = report.data
        assert data["reversible"] is reversible
        assert len(data["pairs"]) == 3
        triangle = data["triangle"]
        assert triangle["holds"]
        assert triangle["detour"] - triangle["direct"] > 1e-2
        if reversible:
            assert data["max_asymmetry"] < 2e-3

    def test_triangle_corners_are_strict_for_the_round_metric(self):
        a, b, c = triangle_points(2)
        assert np.allclose([np.linalg.norm(p) for p in (a, b, c)], 1.0)
        direct = math.acos(a @ c)
        detour = math.acos(a @ b) + math.acos(b @ c)
        assert detour - direct == pytest.approx(math.pi / 4)
