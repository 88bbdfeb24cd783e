import csv
import json
import subprocess
import sys

import pytest

from ocam.cli import main
from ocam.synth import Scenario, write_scenario


@pytest.fixture
def fileset(tmp_path):
    write_scenario(Scenario(seed=21, weeks=60, split_week=31, coupling_before=0.8,
                            coupling_after=-0.8), tmp_path)
    return tmp_path


def test_full_flow(fileset, capsys):
    cfg = str(fileset / "config.json")
    assert main(["ingest", "--config", cfg]) == 0
    assert (fileset / "store" / "commits.jsonl").is_file()
    assert main(["analyze", "--config", cfg, "--jobs", "1", "--force-segmentation"]) == 0
    out = capsys.readouterr().out
    assert "C1: segmented" in out
    report = json.loads((fileset / "out" / "report.json").read_text())
    assert report[0]["component_id"] == "C1"
    for name in ("metrics.csv", "timeseries.csv", "scatter.csv"):
        assert (fileset / "out" / "C1" / name).is_file()
    rows = list(csv.DictReader((fileset / "out" / "C1" / "metrics.csv").open()))
    assert len(rows) == 60

    assert main(["report", str(fileset / "out" / "report.json"), "--format", "markdown"]) == 0
    assert "Kendall's tau-b" in capsys.readouterr().out
    assert main(["report", str(fileset / "out" / "report.json"), "--format", "csv",
                 "--out", str(fileset / "csv")]) == 0
    assert (fileset / "csv" / "kendall.csv").is_file()


def test_analyze_from_store_with_parallel_workers(fileset, capsys):
    cfg = json.loads((fileset / "config.json").read_text())
    second = dict(cfg["components"][0], component_id="C2")
    empty = dict(cfg["components"][0], component_id="C3")
    cfg["components"] += [second, empty]
    (fileset / "config.json").write_text(json.dumps(cfg))
    # C2 reuses C1's commits but has no size or TD rows; C3 has no commits at all
    (fileset / "empty.jsonl").write_text("")
    cfg["components"][2]["commits"] = "empty.jsonl"
    (fileset / "config.json").write_text(json.dumps(cfg))
    assert main(["ingest", "--config", str(fileset / "config.json")]) == 0
    assert main(["analyze", "--store", str(fileset / "store"), "--out", str(fileset / "o2"),
                 "--jobs", "2", "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "C1: " in out
    assert "skipped (no observations): C2, C3" in out
    assert (fileset / "o2" / "kendall.csv").is_file()


def test_missing_input_names_the_file(fileset, capsys):
    (fileset / "prs.jsonl").unlink()
    assert main(["ingest", "--config", str(fileset / "config.json")]) == 1
    assert "prs.jsonl" in capsys.readouterr().err


def test_strict_mode_exit_code(fileset, capsys):
    with open(fileset / "tickets.jsonl", "a") as fh:
        fh.write("{broken\n")
    assert main(["ingest", "--config", str(fileset / "config.json")]) == 0
    assert main(["ingest", "--config", str(fileset / "config.json"), "--strict"]) == 2


def test_synth_and_selftest(tmp_path, capsys):
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"seed": 1, "weeks": 12}))
    assert main(["synth", str(sc), str(tmp_path / "gen")]) == 0
    assert (tmp_path / "gen" / "truth.csv").is_file()
    assert main(["selftest", "--instances", "30"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_console_script_usage_error():
    r = subprocess.run([sys.executable, "-m", "ocam.cli", "analyze", "--no-segmentation",
                        "--force-segmentation"], capture_output=True, text=True)
    assert r.returncode == 1 and "not allowed with" in r.stderr
    r = subprocess.run([sys.executable, "-m", "ocam.cli", "report", "/nonexistent/report.json"],
                       capture_output=True, text=True)
    assert r.returncode == 1 and "/nonexistent/report.json" in r.stderr
