"""Report rendering (JSON, CSV, Markdown) and plot-data export."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .io import atomic_write
from .metrics import WeeklySeries
from .pipeline import VARIABLES, MwuComparison, SegmentedAnalysis, SegmentReport
from .stats import DescriptiveStats, KendallResult, MwuResult, SwResult

FORMATS = ("json", "csv", "markdown")
DAGGER = "†"
SECTION = "§"

SKIP_DESCRIPTIVE = "No descriptive statistics due to lack or limited number of observations."
SKIP_TEST = "No statistical test due to lack or limited number of observations."


# -- (de)serialisation -------------------------------------------------------------


def _opt(obj):
    return None if obj is None else obj.to_dict()


def analysis_to_dict(a: SegmentedAnalysis) -> dict:
    segments = []
    for s in a.segments:
        kendall = None
        if s.kendall is not None:
            kendall = {"tau": s.kendall.tau_b, "p": s.kendall.p_value,
                       "magnitude": s.magnitude, **s.kendall.to_dict()}
        segments.append({
            "label": s.label,
            "n": s.n,
            "weeks": list(s.weeks),
            "descriptive": {v: _opt(s.descriptive.get(v)) for v in VARIABLES},
            "sw": {v: _opt(s.sw.get(v)) for v in VARIABLES},
            "kendall": kendall,
            "skipped": s.skipped,
        })

    def mwu_entry(c: MwuComparison) -> dict:
        out = {"segments": list(c.segments), "skipped": c.skipped}
        for v in VARIABLES:
            r = c.results.get(v)
            out[v] = None if r is None else {"p": r.p_value, "n": r.n1 + r.n2, **r.to_dict()}
        return out

    pairs = [mwu_entry(c) for c in a.mwu]
    return {
        "component_id": a.component_id,
        "segments": segments,
        "mwu": pairs[0] if pairs else None,
        "mwu_pairs": pairs,
        "segmentation_applied": a.segmentation_applied,
        "skip_reasons": list(a.skip_reasons),
        "alpha": a.alpha,
        "min_n": a.min_n,
    }


def _load(cls, d):
    return None if d is None else cls.from_dict(d)


def analysis_from_dict(d: dict) -> SegmentedAnalysis:
    segments = []
    for s in d["segments"]:
        k = s.get("kendall")
        kres = None
        if k is not None:
            kres = KendallResult.from_dict({f: k[f] for f in KendallResult.__dataclass_fields__})
        segments.append(SegmentReport(
            label=s["label"],
            n=s["n"],
            weeks=tuple(s.get("weeks", ())),
            descriptive={v: _load(DescriptiveStats, s["descriptive"].get(v)) for v in VARIABLES},
            sw={v: _load(SwResult, s["sw"].get(v)) for v in VARIABLES},
            kendall=kres,
            magnitude=None if k is None else k["magnitude"],
            skipped=s.get("skipped"),
        ))
    comparisons = []
    for c in d.get("mwu_pairs", []):
        results = {}
        for v in VARIABLES:
            r = c.get(v)
            results[v] = None if r is None else MwuResult.from_dict(
                {f: r[f] for f in MwuResult.__dataclass_fields__})
        comparisons.append(MwuComparison(tuple(c["segments"]), results, c.get("skipped")))
    return SegmentedAnalysis(
        component_id=d["component_id"],
        segments=tuple(segments),
        mwu=tuple(comparisons),
        segmentation_applied=d["segmentation_applied"],
        skip_reasons=tuple(d.get("skip_reasons", ())),
        alpha=d.get("alpha", 0.05),
        min_n=d.get("min_n", 5),
    )


def load_report_json(text: str) -> list[SegmentedAnalysis]:
    return [analysis_from_dict(d) for d in json.loads(text)]


# -- formatting ------------------------------------------------------------------


def format_p(p: Optional[float]) -> str:
    if p is None:
        return "-"
    if p < 0.001:
        return "<0.001"
    return f"{p:.3f}"


def format_num(v: Optional[float], decimals: int) -> str:
    return "-" if v is None else f"{v:.{decimals}f}"


def significance_mark(p: float) -> str:
    if p < 0.01:
        return SECTION
    if p < 0.05:
        return DAGGER
    return ""


# descriptive decimals per variable: (mean, std, min, max)
_DECIMALS = {"degree": (3, 3, 1, 1), "tdd": (3, 3, 3, 3)}


def _reported_segments(a: SegmentedAnalysis) -> list[SegmentReport]:
    """Segments of the layout the correlation was computed on."""
    if a.segmentation_applied:
        return [s for s in a.segments if s.label != "full"]
    full = a.segment("full")
    return [full] if full is not None else []


def _descriptive_segments(a: SegmentedAnalysis) -> list[SegmentReport]:
    split = [s for s in a.segments if s.label != "full"]
    return split or [s for s in a.segments if s.label == "full"]


def _descriptive_rows(analyses):
    rows = []
    for a in analyses:
        for s in _descriptive_segments(a):
            for var in VARIABLES:
                d = s.descriptive.get(var)
                skipped = d is None or s.n < a.min_n
                dm = _DECIMALS[var]
                rows.append({
                    "component_id": a.component_id,
                    "variable": var,
                    "segment": s.label,
                    "n": s.n,
                    "mean": "-" if skipped else format_num(d.mean, dm[0]),
                    "std": "-" if skipped else format_num(d.std, dm[1]),
                    "min": "-" if skipped else format_num(d.min, dm[2]),
                    "max": "-" if skipped else format_num(d.max, dm[3]),
                    "skipped": skipped,
                })
    return rows


def _mwu_rows(analyses):
    rows = []
    for a in analyses:
        for c in a.mwu:
            row = {"component_id": a.component_id, "comparison": " vs ".join(c.segments),
                   "skipped": c.skipped is not None}
            for var in VARIABLES:
                r = c.results.get(var)
                row[f"{var}_p"] = format_p(None if r is None else r.p_value)
                row[f"{var}_n"] = "-" if r is None else str(r.n1 + r.n2)
                row[f"{var}_significant"] = r is not None and r.p_value < a.alpha
            rows.append(row)
    return rows


def _kendall_rows(analyses):
    rows = []
    for a in analyses:
        for s in _reported_segments(a):
            k = s.kendall
            rows.append({
                "component_id": a.component_id,
                "segment": s.label,
                "n": s.n,
                "p_value": format_p(None if k is None else k.p_value),
                "tau": "-" if k is None else f"{k.tau_b:.3f}",
                "mark": "" if k is None else significance_mark(k.p_value),
                "magnitude": s.magnitude or "-",
                "significant_05": k is not None and k.p_value < 0.05,
                "significant_01": k is not None and k.p_value < 0.01,
                "significant": k is not None and k.p_value < a.alpha,
                "skipped": k is None,
            })
    return rows


def _csv_text(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _bold(text: str, on: bool) -> str:
    return f"**{text}**" if on and text != "-" else text


def _markdown(analyses) -> str:
    out = ["# Contribution degree and technical debt density", ""]

    out += ["## Descriptive statistics", ""]
    for var, title in (("degree", "Contribution degree"), ("tdd", "Technical debt density")):
        out += [f"### {title}", "",
                "| Component | Segment | N | Mean | STD | Min | Max |",
                "|---|---|---:|---:|---:|---:|---:|"]
        any_skip = False
        for r in _descriptive_rows(analyses):
            if r["variable"] != var:
                continue
            name = r["component_id"] + (DAGGER if r["skipped"] else "")
            any_skip |= r["skipped"]
            out.append(f"| {name} | {r['segment']} | {r['n']} | {r['mean']} | {r['std']} "
                       f"| {r['min']} | {r['max']} |")
        if any_skip:
            out += ["", f"{DAGGER} {SKIP_DESCRIPTIVE}"]
        out.append("")

    out += ["## Mann-Whitney U test", "",
            "| Component | Comparison | Degree P-value | Degree N | TDD P-value | TDD N |",
            "|---|---|---:|---:|---:|---:|"]
    rows = _mwu_rows(analyses)
    for r in rows:
        name = r["component_id"] + (DAGGER if r["skipped"] else "")
        out.append(
            f"| {name} | {r['comparison']} | {_bold(r['degree_p'], r['degree_significant'])} "
            f"| {r['degree_n']} | {_bold(r['tdd_p'], r['tdd_significant'])} | {r['tdd_n']} |")
    if not rows:
        out.append("| - | no split events | - | - | - | - |")
    if any(r["skipped"] for r in rows):
        out += ["", f"{DAGGER} {SKIP_TEST}"]
    out.append("")

    out += ["## Kendall's tau-b", "",
            "| Component | Segment | P-value | Kendall's tau | Magnitude | N |",
            "|---|---|---:|---:|---|---:|"]
    rows = _kendall_rows(analyses)
    for r in rows:
        sig = r["significant"]
        n = f"{r['n']}*" if r["skipped"] else str(r["n"])
        name = r["component_id"] + ("*" if r["skipped"] else "")
        tau = r["tau"] + (f" {r['mark']}" if r["mark"] else "")
        out.append(f"| {name} | {r['segment']} | {_bold(r['p_value'], sig)} | {_bold(tau, sig)} "
                   f"| {_bold(r['magnitude'], sig)} | {_bold(n, sig)} |")
    out += ["",
            f"{DAGGER} Correlation is significant at the 0.05 level (2-tailed).",
            f"{SECTION} Correlation is significant at the 0.01 level (2-tailed).",
            f"* {SKIP_TEST}", ""]
    return "\n".join(out)


DESCRIPTIVE_COLUMNS = ("component_id", "variable", "segment", "n", "mean", "std", "min", "max",
                       "skipped")
MWU_COLUMNS = ("component_id", "comparison", "degree_p", "degree_n", "degree_significant",
               "tdd_p", "tdd_n", "tdd_significant", "skipped")
KENDALL_COLUMNS = ("component_id", "segment", "n", "p_value", "tau", "magnitude",
                   "significant_05", "significant_01", "skipped")


def render_report(analyses: Sequence[SegmentedAnalysis], fmt: str = "json") -> dict[str, str]:
    """Render analyses as documents keyed by file name.

    ``json`` yields ``report.json``; ``csv`` yields ``descriptive.csv``,
    ``mwu.csv`` and ``kendall.csv``; ``markdown`` yields ``report.md``.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown report format {fmt!r}; expected one of {FORMATS}")
    analyses = list(analyses)
    if not analyses:
        raise ValueError("no analyses to render")
    if fmt == "json":
        data = [analysis_to_dict(a) for a in analyses]
        return {"report.json": json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"}
    if fmt == "csv":
        return {
            "descriptive.csv": _csv_text(_descriptive_rows(analyses), DESCRIPTIVE_COLUMNS),
            "mwu.csv": _csv_text(_mwu_rows(analyses), MWU_COLUMNS),
            "kendall.csv": _csv_text(_kendall_rows(analyses), KENDALL_COLUMNS),
        }
    return {"report.md": _markdown(analyses)}


def write_documents(docs: dict[str, str], out_dir: Union[str, Path]) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for name, text in sorted(docs.items()):
        path = out_dir / name
        atomic_write(path, text)
        paths.append(path)
    return paths


# -- plot data -------------------------------------------------------------------------


def _week_labels(analysis: Optional[SegmentedAnalysis]) -> dict[int, str]:
    labels = {}
    if analysis is None:
        return labels
    for s in analysis.segments:
        if s.label != "full":
            for w in s.weeks:
                labels[w] = s.label
    return labels


def export_plot_data(
    series: WeeklySeries,
    analysis: Optional[SegmentedAnalysis],
    out_dir: Union[str, Path],
) -> list[Path]:
    """Write ``<component>/timeseries.csv`` and ``<component>/scatter.csv``."""
    labels = _week_labels(analysis)
    ts_rows = [("week", "degree", "tdd", "segment")]
    sc_rows = [("degree", "tdd", "segment")]
    for o in series.observations:
        seg = labels.get(o.week, "full")
        ts_rows.append((o.week, repr(o.contribution.degree), repr(o.tdd.tdd), seg))
        sc_rows.append((repr(o.contribution.degree), repr(o.tdd.tdd), seg))
    base = Path(out_dir) / series.component_id
    paths = []
    for name, rows in (("timeseries.csv", ts_rows), ("scatter.csv", sc_rows)):
        path = base / name
        atomic_write(path, "".join(",".join(str(v) for v in r) + "\n" for r in rows))
        paths.append(path)
    return paths
