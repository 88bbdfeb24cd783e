import tempfile
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from ocam.config import load_config
from ocam.metrics import MetricOptions, Observation, WeeklySeries, ContributionBreakdown, TddPoint
from ocam.metrics import build_weekly_series
from ocam.model import AffiliationTimeline, DEFAULT_EPOCH, week_start
from ocam.pipeline import AnalysisConfig, run_analysis
from ocam.store import ingest
from ocam.synth import write_scenario


def ts(week, day=0, hour=12):
    """A UTC instant inside ``week`` (1-based, default epoch)."""
    return week_start(week) + timedelta(days=day, hours=hour)


def make_series(degrees, tdds, weeks=None, component_id="C1"):
    weeks = weeks or list(range(1, len(degrees) + 1))
    obs = []
    for w, d, t in zip(weeks, degrees, tdds):
        cb = ContributionBreakdown(component_id, w, "blue", d, None, None, None, d, frozenset({"C"}))
        obs.append(Observation(w, cb, TddPoint(component_id, w, t * 1000.0, 1000)))
    return WeeklySeries(component_id, tuple(obs))


def run_scenario(scenario, **analysis_kw):
    """synth -> ingest -> metrics -> analysis, fully in a temporary directory."""
    with tempfile.TemporaryDirectory() as d:
        write_scenario(scenario, d)
        cfg = load_config(Path(d) / "config.json")
        store, _ = ingest(cfg)
        spec = cfg.components[0].spec
        series = build_weekly_series(spec, store.commits, store.prs, store.tickets,
                                     store.td_issues, store.sizes, store.affiliation,
                                     MetricOptions(epoch=cfg.epoch), [])
        truth = (Path(d) / "truth.csv").read_text()
        return series, run_analysis(series, spec, AnalysisConfig(epoch=cfg.epoch, **analysis_kw)), truth


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
