"""Weekly contribution degree and technical debt density per component."""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .model import (
    DEFAULT_EPOCH,
    UNAFFILIATED,
    ActivityRecord,
    AffiliationTimeline,
    CommitRecord,
    ComponentSpec,
    SizeSnapshot,
    TdIssueRecord,
    to_utc,
    week_of,
    week_start,
)

log = logging.getLogger(__name__)

MEASURES = ("C", "Ch", "P", "T")
METRICS_COLUMNS = ("week", "c", "ch", "p", "t", "degree", "td_minutes", "loc", "tdd")


@dataclass(frozen=True)
class MetricOptions:
    epoch: date = DEFAULT_EPOCH
    include_merges: bool = False
    window_weeks: int = 1
    strict_measures: bool = False

    def __post_init__(self):
        if self.window_weeks < 1:
            raise ValueError("window_weeks must be >= 1")


@dataclass(frozen=True)
class ContributionBreakdown:
    component_id: str
    week: int
    team_id: str
    c_commits: Optional[float]
    ch_churn: Optional[float]
    p_prs: Optional[float]
    t_tickets: Optional[float]
    degree: float
    measures_present: frozenset

    def measure(self, name: str) -> Optional[float]:
        return {"C": self.c_commits, "Ch": self.ch_churn,
                "P": self.p_prs, "T": self.t_tickets}[name]


@dataclass(frozen=True)
class TddPoint:
    component_id: str
    week: int
    td_minutes: float
    loc: int

    def __post_init__(self):
        if self.loc <= 0:
            raise ValueError(
                f"{self.component_id} week {self.week}: size must be positive to compute TDD"
            )
        if self.td_minutes < 0:
            raise ValueError(f"{self.component_id} week {self.week}: negative TD stock")

    @property
    def tdd(self) -> float:
        return self.td_minutes / self.loc


@dataclass(frozen=True)
class Observation:
    week: int
    contribution: ContributionBreakdown
    tdd: TddPoint

    @property
    def degree(self) -> float:
        return self.contribution.degree


@dataclass(frozen=True)
class WeeklySeries:
    component_id: str
    observations: tuple = ()

    def __post_init__(self):
        weeks = [o.week for o in self.observations]
        if any(b <= a for a, b in zip(weeks, weeks[1:])):
            raise ValueError(f"{self.component_id}: weeks must be strictly increasing")

    def __len__(self):
        return len(self.observations)

    @property
    def weeks(self) -> list[int]:
        return [o.week for o in self.observations]

    @property
    def degrees(self) -> list[float]:
        return [o.contribution.degree for o in self.observations]

    @property
    def tdds(self) -> list[float]:
        return [o.tdd.tdd for o in self.observations]


def _week_or_none(ts, epoch) -> Optional[int]:
    try:
        return week_of(ts, epoch)
    except ValueError:
        return None


def active_weeks(
    commits: Iterable[CommitRecord],
    epoch: date = DEFAULT_EPOCH,
    include_merges: bool = False,
) -> set[int]:
    """Weeks with at least one (non-merge) commit touching the component."""
    out = set()
    for c in commits:
        if c.is_merge and not include_merges:
            continue
        w = _week_or_none(c.timestamp, epoch)
        if w is not None:
            out.add(w)
    return out


def _percent(part, whole) -> float:
    return 100.0 * part / whole


def measure_shares(
    commits: Sequence[CommitRecord],
    prs: Sequence[ActivityRecord],
    tickets: Sequence[ActivityRecord],
    affiliation: AffiliationTimeline,
) -> dict[str, dict[str, float]]:
    """Per-measure share (percent) of every team, ``"unaffiliated"`` included.

    Events are attributed to the author's team at the event's own timestamp.
    Measures without any activity are absent from the result.
    """
    counts: dict[str, dict[str, int]] = {m: defaultdict(int) for m in MEASURES}
    for c in commits:
        team = affiliation.team_of(c.author, c.timestamp)
        counts["C"][team] += 1
        counts["Ch"][team] += c.churn
    for r in prs:
        counts["P"][affiliation.team_of(r.creator, r.created_at)] += 1
    for r in tickets:
        counts["T"][affiliation.team_of(r.creator, r.created_at)] += 1
    shares = {}
    for m in MEASURES:
        total = sum(counts[m].values())
        if total > 0:
            shares[m] = {team: _percent(v, total) for team, v in counts[m].items()}
    return shares


def _in_window(ts, weeks: set, epoch) -> bool:
    return _week_or_none(ts, epoch) in weeks


def contribution_breakdown(
    week: int,
    owning_team: str,
    commits: Sequence[CommitRecord],
    prs: Sequence[ActivityRecord],
    tickets: Sequence[ActivityRecord],
    affiliation: AffiliationTimeline,
    *,
    component_id: Optional[str] = None,
    options: MetricOptions = MetricOptions(),
) -> ContributionBreakdown:
    """Share of the week's commits, churn, pull requests and tickets made by
    ``owning_team``, and their mean over the measures that had any activity.

    With ``options.window_weeks > 1`` the events of the preceding weeks are
    pooled in as well.
    """
    window = set(range(max(1, week - options.window_weeks + 1), week + 1))
    epoch = options.epoch
    wc = [c for c in commits
          if (options.include_merges or not c.is_merge) and _in_window(c.timestamp, window, epoch)]
    wp = [r for r in prs if _in_window(r.created_at, window, epoch)]
    wt = [r for r in tickets if _in_window(r.created_at, window, epoch)]
    if not wc:
        raise ValueError(f"week {week} has no commits; not an active week")

    team_count = defaultdict(int)
    all_count = defaultdict(int)
    for c in wc:
        owned = affiliation.team_of(c.author, c.timestamp) == owning_team
        all_count["C"] += 1
        all_count["Ch"] += c.churn
        if owned:
            team_count["C"] += 1
            team_count["Ch"] += c.churn
    for key, records in (("P", wp), ("T", wt)):
        for r in records:
            all_count[key] += 1
            if affiliation.team_of(r.creator, r.created_at) == owning_team:
                team_count[key] += 1

    values = {m: _percent(team_count[m], all_count[m]) for m in MEASURES if all_count[m] > 0}
    assert values, "an active week always has at least one commit"
    degree = math.fsum(values.values()) / len(values)
    if component_id is None:
        component_id = wc[0].component_id
    return ContributionBreakdown(
        component_id, week, owning_team,
        values.get("C"), values.get("Ch"), values.get("P"), values.get("T"),
        degree, frozenset(values),
    )


def _td_week(ts, epoch) -> int:
    # debt that predates the epoch is already present in week 1
    w = _week_or_none(ts, epoch)
    return 0 if w is None else w


def td_stock_by_week(
    td_issues: Iterable[TdIssueRecord], weeks: Iterable[int], epoch: date = DEFAULT_EPOCH
) -> dict[int, float]:
    """TD stock (minutes) at each requested week, from add/remove deltas.

    An issue counts for weeks in ``[introduced_week, removed_week)``. Sums are
    carried exactly and rounded once per week.
    """
    deltas: dict[int, Fraction] = defaultdict(Fraction)
    for issue in td_issues:
        minutes = Fraction(issue.remediation_minutes)
        start = _td_week(issue.introduced_at, epoch)
        deltas[start] += minutes
        if issue.removed_at is not None:
            deltas[_td_week(issue.removed_at, epoch)] -= minutes
    change_weeks = sorted(deltas)
    out = {}
    stock = Fraction(0)
    i = 0
    for w in sorted(set(weeks)):
        while i < len(change_weeks) and change_weeks[i] <= w:
            stock += deltas[change_weeks[i]]
            i += 1
        if stock < 0:
            raise AssertionError(f"negative TD stock at week {w}")
        out[w] = float(stock)
    return out


def tdd_series(
    td_issues: Iterable[TdIssueRecord],
    size_snapshots: Iterable[SizeSnapshot],
    weeks: Iterable[int],
    *,
    component_id: str = "",
    epoch: date = DEFAULT_EPOCH,
    warnings: Optional[list] = None,
) -> list[TddPoint]:
    """Technical debt density (minutes per line) for each requested week.

    Weeks without a size snapshot, or with a zero size, are dropped with a
    warning.
    """
    sizes = {s.week: s.loc for s in size_snapshots}
    weeks = sorted(set(weeks))
    stock = td_stock_by_week(td_issues, weeks, epoch)
    points = []
    for w in weeks:
        loc = sizes.get(w)
        msg = None
        if loc is None:
            msg = f"{component_id} week {w}: no size snapshot, week dropped"
        elif loc <= 0:
            msg = f"{component_id} week {w}: size is 0, TDD refused"
        if msg:
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
            continue
        points.append(TddPoint(component_id, w, stock[w], loc))
    return points


def build_weekly_series(
    component: ComponentSpec,
    commits: Sequence[CommitRecord],
    prs: Sequence[ActivityRecord],
    tickets: Sequence[ActivityRecord],
    td_issues: Sequence[TdIssueRecord],
    sizes: Sequence[SizeSnapshot],
    affiliation: AffiliationTimeline,
    options: MetricOptions = MetricOptions(),
    warnings: Optional[list] = None,
) -> WeeklySeries:
    """Aligned (contribution, TDD) observations over the component's active weeks."""
    warnings = [] if warnings is None else warnings
    cid = component.component_id
    commits = [c for c in commits if c.component_id == cid]
    prs = [r for r in prs if r.component_id == cid]
    tickets = [r for r in tickets if r.component_id == cid]
    td_issues = [r for r in td_issues if r.component_id == cid]
    sizes = [s for s in sizes if s.component_id == cid]

    weeks = sorted(active_weeks(commits, options.epoch, options.include_merges))
    by_week_c = _bucket(commits, lambda c: c.timestamp, options)
    by_week_p = _bucket(prs, lambda r: r.created_at, options)
    by_week_t = _bucket(tickets, lambda r: r.created_at, options)

    tdd_points = {p.week: p for p in tdd_series(
        td_issues, sizes, weeks, component_id=cid, epoch=options.epoch, warnings=warnings)}

    observations = []
    for w in weeks:
        owner = component.owner_at(week_start(w, options.epoch))
        if owner is None:
            warnings.append(f"{cid} week {w}: no owning team, week dropped")
            continue
        if w not in tdd_points:
            continue
        span = range(max(1, w - options.window_weeks + 1), w + 1)
        wc = [c for k in span for c in by_week_c.get(k, ())]
        wp = [r for k in span for r in by_week_p.get(k, ())]
        wt = [r for k in span for r in by_week_t.get(k, ())]
        cb = contribution_breakdown(w, owner, wc, wp, wt, affiliation,
                                    component_id=cid, options=options)
        if options.strict_measures and len(cb.measures_present) < len(MEASURES):
            warnings.append(f"{cid} week {w}: missing measures "
                            f"{sorted(set(MEASURES) - cb.measures_present)}, week dropped")
            continue
        observations.append(Observation(w, cb, tdd_points[w]))
    return WeeklySeries(cid, tuple(observations))


def _bucket(records, ts_of, options: MetricOptions) -> dict[int, list]:
    out: dict[int, list] = defaultdict(list)
    for r in records:
        w = _week_or_none(ts_of(r), options.epoch)
        if w is not None:
            out[w].append(r)
    return out


def _fmt(v) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def metrics_csv(series: WeeklySeries) -> str:
    """CSV text with columns week,c,ch,p,t,degree,td_minutes,loc,tdd."""
    lines = [",".join(METRICS_COLUMNS)]
    for o in series.observations:
        cb, tp = o.contribution, o.tdd
        row = (o.week, cb.c_commits, cb.ch_churn, cb.p_prs, cb.t_tickets,
               cb.degree, tp.td_minutes, tp.loc, tp.tdd)
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"
