import csv
import io
import json
import math

import pytest

from conftest import make_series
from ocam.pipeline import run_analysis
from ocam.report import (
    analysis_to_dict,
    export_plot_data,
    format_p,
    load_report_json,
    render_report,
    significance_mark,
)
from ocam.synth.rng import SplitMix64


def _analysis(seed=1, n=40, split=None, cid="C1"):
    rng = SplitMix64(seed)
    d = [rng.uniform(0, 100) for _ in range(n)]
    t = [1 - v / 200 + 0.05 * rng.gauss() for v in d]
    s = make_series(d, t, component_id=cid)
    return s, run_analysis(s, split_weeks=split)


@pytest.mark.parametrize("p,text", [(0.0004, "<0.001"), (0.000999, "<0.001"), (0.001, "0.001"),
                                    (0.0494, "0.049"), (0.5, "0.500"), (None, "-")])
def test_format_p(p, text):
    assert format_p(p) == text


def test_significance_marks():
    assert significance_mark(0.004) == "§"
    assert significance_mark(0.03) == "†"
    assert significance_mark(0.2) == ""


def test_small_segments_are_footnoted_skips():
    _, a = _analysis(n=33, split=[4])
    md = render_report([a], "markdown")["report.md"]
    # descriptive and MWU skips carry a dagger; Kendall skips an asterisk
    assert "| C1† | before | 3 | - | - | - | - |" in md
    assert "| C1† | before vs after | - | - | - | - |" in md
    assert "| C1* | before | - | - | - | 3* |" in md
    assert "No descriptive statistics due to lack or limited number of observations." in md
    assert "* No statistical test due to lack or limited number of observations." in md


def test_markdown_marks_significant_correlation():
    _, a = _analysis(n=60)
    md = render_report([a], "markdown")["report.md"]
    kendall = md.split("## Kendall's tau-b")[1]
    line = next(l for l in kendall.splitlines() if l.startswith("| C1 | full |"))
    assert "**<0.001**" in line and "§" in line and "Strong" in line


def test_json_round_trip_is_lossless():
    analyses = [_analysis(seed=2, n=50, split=[20])[1], _analysis(seed=3, n=33, split=[4], cid="C8")[1],
                _analysis(seed=4, n=12, cid="C9")[1]]
    text = render_report(analyses, "json")["report.json"]
    back = load_report_json(text)
    assert back == analyses
    assert render_report(back, "json")["report.json"] == text
    for fmt in ("csv", "markdown"):
        assert render_report(back, fmt) == render_report(analyses, fmt)


def test_json_layout():
    _, a = _analysis(n=50, split=[20])
    d = json.loads(render_report([a], "json")["report.json"])[0]
    assert {"component_id", "segments", "mwu", "segmentation_applied", "skip_reasons"} <= set(d)
    full = [s for s in d["segments"] if s["label"] == "full"][0]
    assert {"tau", "p", "magnitude"} <= set(full["kendall"])


def test_csv_documents():
    _, a = _analysis(n=33, split=[4])
    docs = render_report([a], "csv")
    assert set(docs) == {"descriptive.csv", "mwu.csv", "kendall.csv"}
    rows = list(csv.DictReader(io.StringIO(docs["kendall.csv"])))
    assert [r["segment"] for r in rows] == ["before", "after"]
    assert rows[0]["skipped"] == "True" and rows[0]["tau"] == "-"
    with pytest.raises(ValueError):
        render_report([a], "pdf")


def test_plot_data(tmp_path):
    s, a = _analysis(n=20, split=[8])
    export_plot_data(s, a, tmp_path)
    rows = list(csv.DictReader((tmp_path / "C1" / "timeseries.csv").open()))
    assert len(rows) == 20
    assert {r["segment"] for r in rows} == {"before", "after"}
    assert float(rows[0]["degree"]) == s.degrees[0]
    scatter = list(csv.DictReader((tmp_path / "C1" / "scatter.csv").open()))
    assert [float(r["tdd"]) for r in scatter] == s.tdds
