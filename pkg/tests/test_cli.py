#!/usr/bin/env python3
"""
End-to-end tests for the interdict command line.
"""

import json
from unittest.mock import patch

import pytest
import yaml

from conftest import FIXTURES
from app.config import Config
from app.database import recent_ratio_records, save_run_to_db
from app.main import build_manifest, main
from interdiction.errors import InfeasibleError
from interdiction.instance import instance_digest, parse_instance

WALKERS = str(FIXTURES / "two_walkers.json")
PAIR = str(FIXTURES / "bridges_pair.json")
PATH_GRAPH = str(FIXTURES / "path_graph.json")
SETS = str(FIXTURES / "sets.json")


@pytest.fixture(autouse=True)
def quiet_logs(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "LOG_FILE", str(tmp_path / "logs" / "interdict.log"))


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolveCommand:
    """Test ``interdict solve``."""

    def test_solve_stdout(self, capsys):
        """Test the solution document and manifest on stdout."""
        code, out, err = _run(capsys, "solve", "--instance", WALKERS)
        doc = json.loads(out)
        assert code == 0
        assert doc["placement"] == [5, 8, 11]
        assert doc["problem"] == {"type": "fi"}
        manifest = doc["manifest"]
        assert manifest["command"] == f"interdict solve --instance {WALKERS}"
        assert manifest["algorithm"] == "path-fi"
        expected = instance_digest(parse_instance(open(WALKERS, encoding="utf-8").read()))
        assert manifest["instance_digest"] == expected
        assert set(manifest["versions"]) == {"interdict", "python", "numpy", "scipy", "networkx"}
        assert "Placement" in err

    def test_solve_to_file(self, capsys, tmp_path):
        """Test --output writes the file and leaves stdout empty."""
        target = tmp_path / "out" / "solution.json"
        code, out, _ = _run(capsys, "solve", "--instance", WALKERS, "-o", str(target))
        assert code == 0
        assert out == ""
        assert json.loads(target.read_text())["cost"] == 3

    def test_infeasible_exit_code(self, capsys):
        """Test infeasibility exits with status 2."""
        with patch("app.main.run_solver", side_effect=InfeasibleError("no placement")):
            code, _, err = _run(capsys, "solve", "--instance", WALKERS)
        assert code == 2
        assert "INFEASIBLE" in err

    def test_invalid_instance(self, capsys, tmp_path):
        """Test violations are listed and exit with status 1."""
        doc = json.loads(open(WALKERS, encoding="utf-8").read())
        doc["costs"][0] = -1
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, _, err = _run(capsys, "solve", "--instance", str(bad))
        assert code == 1
        assert "NEGATIVE_COST" in err

    def test_missing_file(self, capsys):
        """Test a missing instance file exits with status 1."""
        code, _, err = _run(capsys, "solve", "--instance", "no/such/file.json")
        assert code == 1
        assert "not found" in err

    def test_problem_mismatch(self, capsys):
        """Test an FI instance refuses a BI algorithm."""
        code, _, err = _run(capsys, "solve", "--instance", WALKERS, "--algorithm", "path-dp")
        assert code == 1
        assert "PROBLEM_MISMATCH" in err


class TestVerifyCommand:
    """Test ``interdict verify``."""

    def _solve(self, capsys, tmp_path):
        target = tmp_path / "solution.json"
        _run(capsys, "solve", "--instance", WALKERS, "-o", str(target))
        return target

    def test_verify_passes(self, capsys, tmp_path):
        """Test a fresh solution verifies."""
        solution = self._solve(capsys, tmp_path)
        code, out, _ = _run(capsys, "verify", "--instance", WALKERS, "--solution", str(solution))
        doc = json.loads(out)
        assert code == 0
        assert doc["feasible"] and doc["cost_matches"] and doc["objective_matches"]
        assert doc["capture"] == [pytest.approx(1.0), pytest.approx(1.0)]

    def test_verify_tampered(self, capsys, tmp_path):
        """Test a placement that lets a walker through fails."""
        solution = self._solve(capsys, tmp_path)
        doc = json.loads(solution.read_text())
        doc["placement"] = [5, 8]
        solution.write_text(json.dumps(doc))
        code, out, _ = _run(capsys, "verify", "--instance", WALKERS, "--solution", str(solution))
        assert code == 1
        assert not json.loads(out)["feasible"]

    def test_digest_mismatch(self, capsys, tmp_path):
        """Test a solution for another instance is refused."""
        solution = self._solve(capsys, tmp_path)
        doc = json.loads(solution.read_text())
        doc["manifest"]["instance_digest"] = "0" * 64
        solution.write_text(json.dumps(doc))
        code, _, err = _run(capsys, "verify", "--instance", WALKERS, "--solution", str(solution))
        assert code == 1
        assert "DIGEST_MISMATCH" in err

    def test_verify_bridges(self, capsys, tmp_path):
        """Test a bridges solution verifies against its instance."""
        target = tmp_path / "bridges.json"
        _run(capsys, "bridges", "--instance", PAIR, "-o", str(target))
        code, out, _ = _run(capsys, "verify", "--instance", PAIR, "--solution", str(target))
        doc = json.loads(out)
        assert code == 0
        assert doc["claws_satisfied"]
        assert doc["score"]["fp_plus_fn"] == pytest.approx(1.0)


class TestBridgesCommands:
    """Test ``interdict bridges`` and ``interdict score``."""

    def test_bridges(self, capsys):
        """Test the pair fixture opens one bridge."""
        code, out, err = _run(capsys, "bridges", "--instance", PAIR)
        doc = json.loads(out)
        assert code == 0
        assert len(doc["open"]) == 1
        assert doc["algorithm"] == "convex"
        assert "FP+FN" in err

    def test_score_open(self, capsys):
        """Test scoring an explicit set of open bridges."""
        code, out, _ = _run(capsys, "score", "--instance", PAIR, "--open", "0,1")
        doc = json.loads(out)
        assert code == 0
        assert doc["score"]["exact"]["fp_plus_fn"] == "2"

    def test_score_bad_list(self, capsys):
        """Test a malformed bridge list is a schema error."""
        code, _, err = _run(capsys, "score", "--instance", PAIR, "--open", "0,x")
        assert code == 1
        assert "SCHEMA" in err


class TestEstimateCommand:
    """Test ``interdict estimate``."""

    def test_estimate(self, capsys):
        """Test estimates sit next to the exact probabilities."""
        code, out, _ = _run(
            capsys, "estimate", "--instance", WALKERS, "--placement", "4,10", "--trials", "4000"
        )
        doc = json.loads(out)
        assert code == 0
        assert len(doc["evaders"]) == 2
        for row in doc["evaders"]:
            assert abs(row["estimate"] - row["capture_probability"]) <= 5 * row["stderr"] + 0.01
        reach = doc["evaders"][0]["reach_probabilities"]
        assert "6" not in reach
        assert reach["3"] == pytest.approx(0.5)

    def test_estimate_seeded(self, capsys):
        """Test equal seeds give equal estimates."""
        argv = ["estimate", "--instance", WALKERS, "--placement", "4", "--trials", "1000"]
        _, first, _ = _run(capsys, *argv, "--seed", "7")
        _, second, _ = _run(capsys, *argv, "--seed", "7")
        assert json.loads(first)["evaders"] == json.loads(second)["evaders"]


class TestGenerateCommand:
    """Test ``interdict generate``."""

    def test_vc(self, capsys):
        """Test the vertex-cover construction from a graph file."""
        code, out, err = _run(capsys, "generate", "vc", "--graph", PATH_GRAPH, "--budget", "2")
        doc = json.loads(out)
        assert code == 0
        assert doc["graph"]["n"] == 5
        assert doc["provenance"]["threshold"] == "3/4"
        assert "threshold" in err

    def test_maxcov(self, capsys):
        """Test the maximum-coverage construction from a sets file."""
        code, out, _ = _run(capsys, "generate", "maxcov", "--sets", SETS, "--k", "2")
        doc = json.loads(out)
        assert code == 0
        assert doc["problem"] == {"type": "bi", "budget": 2}
        assert len(doc["evaders"]) == 5

    def test_mis_netflow(self, capsys):
        """Test the bridges construction from a graph file."""
        code, out, _ = _run(capsys, "generate", "mis-netflow", "--graph", PATH_GRAPH)
        assert code == 0
        assert json.loads(out)["format"] == "interdict-bridges"

    def test_missing_input(self, capsys):
        """Test a construction without its input file is refused."""
        code, _, err = _run(capsys, "generate", "vc")
        assert code == 1
        assert "--graph" in err


class TestReportCommand:
    """Test ``interdict report``."""

    def test_report(self, capsys, tmp_path, monkeypatch):
        """Test a passing report saves its files and exits 0."""
        config = {
            "profiles": {
                "default": {
                    "families": {
                        "tiny": {
                            "generator": "cycle",
                            "algorithm": "cycle",
                            "nodes": [3, 5],
                            "seed": 1,
                            "count": 3,
                        }
                    }
                }
            }
        }
        families = tmp_path / "families.yaml"
        families.write_text(yaml.safe_dump(config))
        monkeypatch.setattr(Config, "FAMILIES_FILE", str(families))
        out_dir = tmp_path / "reports"
        code, _, err = _run(
            capsys, "report", "--family", "tiny", "--format", "both", "--output-dir", str(out_dir)
        )
        assert code == 0
        assert len(list(out_dir.iterdir())) == 3
        assert "Report saved to" in err


class TestHistory:
    """Test the run-history database."""

    def test_run_saved(self, tmp_path, monkeypatch):
        """Test a document is stored with its manifest fields."""
        monkeypatch.setattr(Config, "HISTORY_DB", str(tmp_path / "history.db"))
        document = {"placement": [1], "manifest": build_manifest(["solve"], None, "cycle", 3)}
        record = save_run_to_db(document)
        assert record.id is not None
        assert record.algorithm == "cycle"
        assert record.seed == 3

    def test_report_saved(self, capsys, tmp_path, monkeypatch):
        """Test ratio summaries are stored when history is enabled."""
        monkeypatch.setattr(Config, "HISTORY_DB", str(tmp_path / "history.db"))
        monkeypatch.setattr(Config, "FAMILIES_FILE", str(FIXTURES.parent.parent / "families.yaml"))
        code, _, _ = _run(
            capsys,
            "report",
            "--family",
            "path-fi",
            "--profile",
            "quick",
            "--count",
            "2",
            "--output-dir",
            str(tmp_path / "reports"),
        )
        assert code == 0
        records = recent_ratio_records("path-fi")
        assert records and records[0].instances == 2

    def test_history_lists_reports(self, capsys, tmp_path, monkeypatch):
        """Test ``history`` lists stored ratio reports, newest first."""
        monkeypatch.setattr(Config, "HISTORY_DB", str(tmp_path / "history.db"))
        monkeypatch.setattr(Config, "FAMILIES_FILE", str(FIXTURES.parent.parent / "families.yaml"))
        for count in ("1", "2"):
            code, _, _ = _run(
                capsys,
                "report",
                "--family",
                "path-fi",
                "--profile",
                "quick",
                "--count",
                count,
                "--output-dir",
                str(tmp_path / "reports"),
            )
            assert code == 0
        code, out, err = _run(capsys, "history", "--algorithm", "path-fi", "--limit", "5")
        rows = json.loads(out)["reports"]
        assert code == 0
        assert [row["instances"] for row in rows] == [2, 1]
        assert all(row["family"] == "path-fi" for row in rows)
        assert "PASS" in err

    def test_history_disabled(self, capsys, monkeypatch):
        """Test ``history`` fails cleanly without a database."""
        monkeypatch.setattr(Config, "HISTORY_DB", "")
        code, out, err = _run(capsys, "history")
        assert code == 1
        assert out == ""
        assert "HISTORY_DB" in err
