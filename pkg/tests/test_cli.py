"""Command-line interface: exit codes, files written, report shapes."""

import csv
import json

import pytest

from swarmsafe import cli
from swarmsafe.metrics import csv_header

from test_sim import BASE


@pytest.fixture
def tiny_path(tmp_path):
    path = tmp_path / "tiny.scenario"
    path.write_text(json.dumps(BASE))
    return path


def test_scenarios_lists_bundled(capsys):
    assert cli.main(["scenarios"]) == 0
    out = capsys.readouterr().out
    assert "gauntlet15" in out and "quad4_noisy" in out


def test_validate_ok(tiny_path, capsys):
    assert cli.main(["validate", str(tiny_path)]) == 0
    out = capsys.readouterr().out
    assert "ok: tiny" in out and "2 robots" in out


def test_validate_bad_scenario_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text('{"name": "x"}')
    assert cli.main(["validate", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_scenario_exits_2(capsys):
    assert cli.main(["run", "no_such_scenario"]) == 2
    assert "error:" in capsys.readouterr().err


def test_run_writes_outputs(tiny_path, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(tiny_path), "--out", str(out), "--frames"]) == 0

    with (out / "metrics.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == csv_header(2)
    assert len(rows) == 1 + BASE["run"]["steps"]
    # every float field parses back
    for row in rows[1:]:
        [float(x) for x in row]

    summary = json.loads((out / "summary.json").read_text())
    assert summary["scenario"] == "tiny" and summary["safety_ok"] is True

    report = json.loads((out / "bound_report.json").read_text())
    assert set(report) == {"swarm_bound", "individual_bound", "neighbor_proximity"}
    for section in report.values():
        assert set(section) == {"min_margin", "holds_all_steps"}

    frames = sorted((out / "frames").glob("*.json"))
    assert len(frames) == BASE["run"]["steps"]
    first = json.loads(frames[0].read_text())
    assert first["step"] == 0 and len(first["positions"]) == 2

    stdout = capsys.readouterr().out
    assert "min_barrier" in stdout


def test_run_quiet_silences_progress(tiny_path, tmp_path, capsys):
    out = tmp_path / "quiet"
    assert cli.main(["run", str(tiny_path), "--out", str(out), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_run_both_modes_suffixes_files(tiny_path, tmp_path):
    out = tmp_path / "both"
    assert cli.main(["run", str(tiny_path), "--out", str(out),
                     "--mode", "both"]) == 0
    assert (out / "metrics_decentralized.csv").exists()
    assert (out / "metrics_centralized.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {"decentralized", "centralized"}


def test_run_seed_override_changes_nothing_when_noiseless(tiny_path, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", str(tiny_path), "--out", str(out_a),
                     "--seed", "7", "--quiet"]) == 0
    assert cli.main(["run", str(tiny_path), "--out", str(out_b),
                     "--seed", "8", "--quiet"]) == 0
    rows_a = (out_a / "metrics.csv").read_text()
    rows_b = (out_b / "metrics.csv").read_text()
    assert rows_a == rows_b      # explicit placement, zero noise


def test_timing_reports(tiny_path, capsys):
    assert cli.main(["timing", str(tiny_path)]) == 0
    out = capsys.readouterr().out
    assert "ms/robot" in out and "kernels=" in out


def test_kernels_flag(tiny_path, capsys):
    from swarmsafe import kernels
    before = kernels.active()
    try:
        assert cli.main(["timing", str(tiny_path), "--kernels", "numpy"]) == 0
        assert "kernels=numpy" in capsys.readouterr().out
        assert kernels.active() == "numpy"
    finally:
        kernels.use(before)


def test_unsafe_run_exits_1(tmp_path, capsys):
    # a hopeless scenario: huge swarm density parked on the danger set with a
    # microscopic budget; the run completes but reports the violation
    doc = json.loads(json.dumps(BASE))
    doc["robots"]["placement"]["positions"] = [[0.0, -0.4], [0.05, -0.4]]
    doc["control"]["safety_threshold"] = 1e-6
    doc["run"]["steps"] = 2
    path = tmp_path / "doomed.scenario"
    path.write_text(json.dumps(doc))
    out = tmp_path / "doomed"
    assert cli.main(["run", str(path), "--out", str(out)]) == 1
    assert "SAFETY VIOLATION" in capsys.readouterr().err
    summary = json.loads((out / "summary.json").read_text())
    assert summary["safety_ok"] is False
