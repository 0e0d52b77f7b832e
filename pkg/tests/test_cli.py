from __future__ import annotations

import json
import subprocess
import sys

import pytest

from arnsim.cli import load_scenario, main
from arnsim.world import ScenarioError


def test_builtin_scenario_resolves():
    scenario = load_scenario("office3")
    assert scenario.name == "office3"
    assert scenario.n_robots == 3


def test_missing_scenario_errors():
    with pytest.raises(ScenarioError):
        load_scenario("no_such_scenario_anywhere.json")


def test_scenario_from_file(tmp_path, office3_doc):
    path = tmp_path / "copy.json"
    path.write_text(json.dumps(office3_doc))
    scenario = load_scenario(str(path))
    assert scenario.n_robots == 3


def test_batch_run_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--mode", "batch", "--trials", "2", "--seed", "11",
                 "--out", str(out)])
    assert code == 0
    csv_lines = (out / "results.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + 4  # header + 2 seeds x 2 configurations
    summary = json.loads((out / "summary.json").read_text())
    assert summary["n_trials"] == 2
    assert summary["low_power"] is True
    assert summary["statistical_test"] == "welch_t_two_sided"


def test_batch_single_configuration(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--mode", "batch", "--trials", "2", "--seed", "11",
                 "--feedback", "off", "--out", str(out)])
    assert code == 0
    rows = (out / "results.csv").read_text().splitlines()[1:]
    assert all(row.split(",")[1] == "without_feedback" for row in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["p_value_t_all"] is None


def test_trace_flag_writes_event_logs(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "--mode", "batch", "--trials", "2", "--seed", "11",
                 "--feedback", "on", "--out", str(out), "--trace"])
    assert code == 0
    traces = sorted((out / "traces").glob("*.ndjson"))
    assert len(traces) == 2
    first_line = json.loads(traces[0].read_text().splitlines()[0])
    assert first_line["event"] == "trial_start"


def test_invalid_trials_usage_error(tmp_path):
    code = main(["run", "--mode", "batch", "--trials", "1", "--out",
                 str(tmp_path / "x")])
    assert code == 1


def test_console_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "arnsim.cli", "run", "--help"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "--scenario" in proc.stdout
    assert "--feedback" in proc.stdout
