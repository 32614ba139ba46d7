"""Unit tests for scenarios, the runner and the command-line surface."""
import sys
import os
import json
import pytest
import yaml
from typer.testing import CliRunner

# add the parent directory to path so imports work from tests/ folder
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from chain.errors import SnapshotError
from cli.commands import app
from cli.errors import ExpectationFailed, ScenarioError
from cli.runner import run_scenario, verify_snapshot
from cli.scenario import load_scenario
from tests.builders import SCENARIO_DIR, bundled_run

SETUP = [
    {"atTime": 1, "actor": "server", "kind": "deployJC"},
    {"atTime": 2, "actor": "gateway", "kind": "registerMethod", "method": "m",
     "subject": "laptop", "object": "sensor",
     "policies": [{"resource": "temperature", "action": "read", "permission": "allow",
                   "minInterval": 100, "threshold": 2}]},
]


def write_scenario(tmp_path, actions, **fields):
    """Scenario file next to the bundled topology; returns its path."""
    document = {"schemaVersion": 1, "topology": str(SCENARIO_DIR / "topology.yaml"),
                "difficulty": 4, "seed": 3, "actions": actions}
    document.update(fields)
    path = tmp_path / "scenario.scn"
    path.write_text(yaml.safe_dump(document), encoding="utf-8")
    return path


def request_action(time, **extra):
    """Laptop reads the sensor's temperature."""
    action = {"atTime": time, "actor": "laptop", "kind": "request", "method": "m",
              "resource": "temperature", "action": "read"}
    action.update(extra)
    return action


class TestScenarioSchema:
    """Test scenario validation."""

    def test_bundled_scenarios_parse(self):
        """Test every bundled scenario validates."""
        for name in ("casestudy.scn", "lifecycle.scn", "forwarded.scn"):
            scenario, topology = load_scenario(SCENARIO_DIR / name)
            assert scenario.actions
            assert topology.exists()

    def test_times_must_increase(self, tmp_path):
        """Test repeated action times are refused."""
        path = write_scenario(tmp_path, SETUP + [request_action(500), request_action(500)])
        with pytest.raises(ScenarioError):
            load_scenario(path)

    def test_first_request_after_min_interval(self, tmp_path):
        """Test the first request must come after the largest minInterval."""
        path = write_scenario(tmp_path, SETUP + [request_action(100)])
        with pytest.raises(ScenarioError):
            load_scenario(path)

    def test_missing_fields(self, tmp_path):
        """Test a request without a resource is refused."""
        action = request_action(500)
        del action["resource"]
        with pytest.raises(ScenarioError):
            load_scenario(write_scenario(tmp_path, SETUP + [action]))

    def test_unknown_kind(self, tmp_path):
        """Test unknown action kinds are refused."""
        path = write_scenario(tmp_path, [{"atTime": 1, "actor": "server", "kind": "mine"}])
        with pytest.raises(ScenarioError):
            load_scenario(path)


class TestRunScenario:
    """Test running scenarios end to end."""

    def test_case_study_penalties(self):
        """Test the 1st, 3rd and 6th misbehaviors cost 60, 120 and 240 seconds."""
        report = bundled_run("casestudy.scn")
        penalties = [record["outcome"]["penalty"] for record in report.records
                     if record["outcome"] and record["outcome"]["penalty"] > 0
                     and record["txId"] is not None]
        assert penalties == [60, 60, 120, 120, 120, 240]

    def test_bundled_scenarios_pass(self):
        """Test the lifecycle and forwarded scenarios meet all their expectations."""
        assert bundled_run("lifecycle.scn").ok
        assert bundled_run("forwarded.scn").ok

    def test_forwarded_matches_direct(self):
        """Test the forwarded burst decides exactly like the direct one."""
        def decisions(name):
            return [(r["outcome"]["time"], r["outcome"]["result"], r["outcome"]["penalty"])
                    for r in bundled_run(name).records
                    if r["outcome"] and r["txId"] is not None]
        forwarded = decisions("forwarded.scn")
        assert decisions("casestudy.scn")[:len(forwarded)] == forwarded

    def test_deterministic(self, tmp_path):
        """Test two runs of one scenario write byte-identical run logs."""
        first = run_scenario(SCENARIO_DIR / "forwarded.scn", tmp_path / "a")
        second = run_scenario(SCENARIO_DIR / "forwarded.scn", tmp_path / "b")
        assert first.runlog_path.read_bytes() == second.runlog_path.read_bytes()
        assert first.snapshot_path.read_bytes() == second.snapshot_path.read_bytes()

    def test_empty_script(self, tmp_path):
        """Test no actions gives an empty run log."""
        report = run_scenario(write_scenario(tmp_path, []), tmp_path / "out")
        assert report.ok
        assert report.runlog_path.read_text(encoding="utf-8") == ""

    def test_failed_expectation(self, tmp_path):
        """Test a wrong expectation stops the run."""
        actions = SETUP + [request_action(500), {"kind": "expect", "result": False}]
        report = run_scenario(write_scenario(tmp_path, actions))
        assert isinstance(report.failure, ExpectationFailed)

    def test_expected_error(self, tmp_path):
        """Test an action failing with its expected code does not stop the run."""
        outsider = request_action(500, actor="storage", expectError="unauthorized-caller")
        actions = SETUP + [outsider, request_action(600), {"kind": "expect", "result": True}]
        report = run_scenario(write_scenario(tmp_path, actions))
        assert report.ok, report.failure
        statuses = [record["status"] for record in report.records if record["txId"]]
        assert "unauthorized-caller" in statuses

    def test_records_carry_events(self):
        """Test request records hold the returnResult event of their block."""
        record = next(r for r in bundled_run("casestudy.scn").records
                      if r["action"]["kind"] == "request")
        assert record["status"] == "ok"
        assert record["events"][0]["name"] == "returnResult"
        assert record["events"][0]["payload"] == [True, 0]
        assert record["height"] > 0


class TestVerifySnapshot:
    """Test snapshot verification."""

    def snapshot(self, tmp_path):
        """Snapshot of the forwarded scenario."""
        return run_scenario(SCENARIO_DIR / "forwarded.scn", tmp_path).snapshot_path

    def test_untouched(self, tmp_path):
        """Test a fresh snapshot verifies."""
        assert verify_snapshot(self.snapshot(tmp_path))

    def test_mutated_argument(self, tmp_path):
        """Test changing one transaction argument breaks verification."""
        path = self.snapshot(tmp_path)
        document = json.loads(path.read_text(encoding="utf-8"))
        tx = next(tx for block in document["blocks"] for tx in block["transactions"]
                  if tx["abi"] == "accessControl")
        tx["args"][2]["int"] += 1
        path.write_text(json.dumps(document), encoding="utf-8")
        assert not verify_snapshot(path)

    def test_truncated(self, tmp_path):
        """Test dropping the last block breaks verification."""
        path = self.snapshot(tmp_path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["blocks"].pop()
        path.write_text(json.dumps(document), encoding="utf-8")
        assert not verify_snapshot(path)

    def test_nonce_out_of_range(self, tmp_path):
        """Test a nonce that cannot be packed is a verdict, not a crash."""
        for nonce in (-1, 1 << 64):
            path = self.snapshot(tmp_path / str(nonce))
            document = json.loads(path.read_text(encoding="utf-8"))
            document["blocks"][0]["nonce"] = nonce
            path.write_text(json.dumps(document), encoding="utf-8")
            assert not verify_snapshot(path)

    def test_unparsable(self, tmp_path):
        """Test garbage is a parse error, not a verdict."""
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(SnapshotError):
            verify_snapshot(path)


class TestCommands:
    """Test exit codes of the command-line surface."""

    def test_run_and_verify(self, tmp_path):
        """Test run exits 0 and verify accepts its snapshot."""
        runner = CliRunner()
        result = runner.invoke(app, ["run", str(SCENARIO_DIR / "forwarded.scn"),
                                     "--difficulty", "4", "--out", str(tmp_path)])
        assert result.exit_code == 0, result.output
        result = runner.invoke(app, ["verify", str(tmp_path / "snapshot.json")])
        assert result.exit_code == 0
        assert "valid" in result.output

    def test_schema_error_exit(self, tmp_path):
        """Test a bad scenario exits 2."""
        path = write_scenario(tmp_path, SETUP + [request_action(50)])
        result = CliRunner().invoke(app, ["run", str(path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 2

    def test_expectation_exit(self, tmp_path):
        """Test a failed expectation exits 1."""
        actions = SETUP + [request_action(500), {"kind": "expect", "penalty": 60}]
        path = write_scenario(tmp_path, actions)
        result = CliRunner().invoke(app, ["run", str(path), "--out", str(tmp_path / "o")])
        assert result.exit_code == 1

    def test_verify_bad_nonce_exit(self, tmp_path):
        """Test verify exits 1 on a snapshot whose nonce was edited to -1."""
        path = run_scenario(SCENARIO_DIR / "forwarded.scn", tmp_path).snapshot_path
        document = json.loads(path.read_text(encoding="utf-8"))
        document["blocks"][0]["nonce"] = -1
        path.write_text(json.dumps(document), encoding="utf-8")
        result = CliRunner().invoke(app, ["verify", str(path)])
        assert result.exit_code == 1

    def test_verify_invalid_exit(self, tmp_path):
        """Test verify exits 1 on a truncated snapshot."""
        path = run_scenario(SCENARIO_DIR / "forwarded.scn", tmp_path).snapshot_path
        document = json.loads(path.read_text(encoding="utf-8"))
        document["blocks"].pop()
        path.write_text(json.dumps(document), encoding="utf-8")
        result = CliRunner().invoke(app, ["verify", str(path)])
        assert result.exit_code == 1
