"""Per-component analysis: segmentation at team splits, confound test and
segmented Kendall correlation."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Sequence

from .metrics import WeeklySeries
from .model import DEFAULT_EPOCH, ComponentSpec
from .stats import (
    DegenerateInputError,
    DescriptiveStats,
    KendallResult,
    MwuResult,
    SwResult,
    classify_magnitude,
    describe,
    kendall_tau_b,
    mann_whitney_u,
    shapiro_wilk,
)

VARIABLES = ("degree", "tdd")


@dataclass(frozen=True)
class AnalysisConfig:
    epoch: date = DEFAULT_EPOCH
    alpha: float = 0.05
    min_n: int = 5
    force_segmentation: bool = False
    no_segmentation: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.min_n < 2:
            raise ValueError("min_n must be >= 2")
        if self.force_segmentation and self.no_segmentation:
            raise ValueError("force_segmentation and no_segmentation are exclusive")


@dataclass(frozen=True)
class Segment:
    label: str
    observations: tuple

    @property
    def n(self) -> int:
        return len(self.observations)

    @property
    def weeks(self) -> list[int]:
        return [o.week for o in self.observations]

    def values(self, variable: str) -> list[float]:
        if variable == "degree":
            return [o.contribution.degree for o in self.observations]
        if variable == "tdd":
            return [o.tdd.tdd for o in self.observations]
        raise KeyError(variable)


def segment_labels(k: int) -> list[str]:
    """Labels for ``k`` segments: before, after, after_2, ..."""
    if k == 1:
        return ["full"]
    return ["before", "after"] + [f"after_{i}" for i in range(2, k)]


def segment_series(series: WeeklySeries, split_week: int) -> tuple[Segment, Segment]:
    """Split at ``split_week``: before holds weeks < split, after the rest."""
    before = tuple(o for o in series.observations if o.week < split_week)
    after = tuple(o for o in series.observations if o.week >= split_week)
    return Segment("before", before), Segment("after", after)


def split_at(series: WeeklySeries, split_weeks: Sequence[int]) -> list[Segment]:
    """Segments delimited by every split week (k splits give k+1 segments)."""
    bounds = sorted(set(split_weeks))
    labels = segment_labels(len(bounds) + 1)
    buckets: list[list] = [[] for _ in labels]
    for o in series.observations:
        idx = sum(1 for b in bounds if o.week >= b)
        buckets[idx].append(o)
    return [Segment(lbl, tuple(b)) for lbl, b in zip(labels, buckets)]


@dataclass(frozen=True)
class SegmentReport:
    label: str
    n: int
    weeks: tuple = ()
    descriptive: dict = field(default_factory=dict)  # variable -> DescriptiveStats | None
    sw: dict = field(default_factory=dict)  # variable -> SwResult | None
    kendall: Optional[KendallResult] = None
    magnitude: Optional[str] = None
    skipped: Optional[str] = None


@dataclass(frozen=True)
class MwuComparison:
    segments: tuple  # (label_a, label_b)
    results: dict  # variable -> MwuResult | None
    skipped: Optional[str] = None

    def significant(self, alpha: float) -> bool:
        return any(r is not None and r.p_value < alpha for r in self.results.values())


@dataclass(frozen=True)
class SegmentedAnalysis:
    component_id: str
    segments: tuple  # of SegmentReport, ending with the analysed layout
    mwu: tuple  # of MwuComparison for adjacent segments
    segmentation_applied: bool
    skip_reasons: tuple = ()
    alpha: float = 0.05
    min_n: int = 5

    def segment(self, label: str) -> Optional[SegmentReport]:
        for s in self.segments:
            if s.label == label:
                return s
        return None

    @property
    def kendall_segments(self) -> list[SegmentReport]:
        return [s for s in self.segments if s.kendall is not None]


def _describe_segment(seg: Segment, skip_reasons: list) -> tuple[dict, dict]:
    desc, sw = {}, {}
    for var in VARIABLES:
        vals = seg.values(var)
        desc[var] = describe(vals) if vals else None
        try:
            sw[var] = shapiro_wilk(vals)
        except DegenerateInputError as exc:
            sw[var] = None
            if vals:
                skip_reasons.append(f"{seg.label}: Shapiro-Wilk on {var} skipped ({exc})")
    return desc, sw


def _kendall_for(seg: Segment, min_n: int, skip_reasons: list):
    if seg.n < min_n:
        reason = (f"{seg.label}: no statistical test due to lack or limited number "
                  f"of observations (n={seg.n} < {min_n})")
        skip_reasons.append(reason)
        return None, None, reason
    try:
        res = kendall_tau_b(seg.values("degree"), seg.values("tdd"))
    except DegenerateInputError as exc:
        reason = f"{seg.label}: Kendall tau-b undefined ({exc})"
        skip_reasons.append(reason)
        return None, None, reason
    return res, classify_magnitude(res.tau_b), None


def run_analysis(
    series: WeeklySeries,
    component: Optional[ComponentSpec] = None,
    config: AnalysisConfig = AnalysisConfig(),
    split_weeks: Optional[Sequence[int]] = None,
) -> SegmentedAnalysis:
    """Describe each segment, test the split as a confound with Mann-Whitney U
    and correlate contribution degree with TDD using Kendall's tau-b.

    Kendall is computed per segment when any adjacent MWU comparison is
    significant at ``config.alpha`` (or when segmentation is forced), and on
    the full series otherwise. Segments smaller than ``config.min_n`` get no
    tests and a recorded skip reason.
    """
    if len(series) == 0:
        raise ValueError(f"{series.component_id}: empty series")
    if split_weeks is None:
        split_weeks = component.split_weeks(config.epoch) if component is not None else []
    skip_reasons: list[str] = []
    segments = split_at(series, split_weeks) if split_weeks else []

    seg_desc = {}
    for seg in segments:
        seg_desc[seg.label] = _describe_segment(seg, skip_reasons)

    comparisons = []
    for a, b in zip(segments, segments[1:]):
        if a.n < config.min_n or b.n < config.min_n:
            reason = (f"{a.label} vs {b.label}: no statistical test due to lack or limited "
                      f"number of observations (n={a.n}, {b.n}; min {config.min_n})")
            skip_reasons.append(reason)
            comparisons.append(MwuComparison((a.label, b.label), {v: None for v in VARIABLES}, reason))
            continue
        results = {v: mann_whitney_u(a.values(v), b.values(v)) for v in VARIABLES}
        comparisons.append(MwuComparison((a.label, b.label), results))

    if not segments or config.no_segmentation:
        segmented = False
    elif config.force_segmentation:
        segmented = True
    else:
        # an untestable split (a segment below min_n) is still treated as a
        # confound, as for components created around the split
        segmented = any(c.significant(config.alpha) or c.skipped for c in comparisons)

    reports = []
    if segmented:
        for seg in segments:
            desc, sw = seg_desc[seg.label]
            kres, mag, skipped = _kendall_for(seg, config.min_n, skip_reasons)
            reports.append(SegmentReport(seg.label, seg.n, tuple(seg.weeks), desc, sw,
                                         kres, mag, skipped))
    else:
        for seg in segments:
            desc, sw = seg_desc[seg.label]
            reports.append(SegmentReport(seg.label, seg.n, tuple(seg.weeks), desc, sw))
        full = Segment("full", series.observations)
        desc, sw = _describe_segment(full, skip_reasons)
        kres, mag, skipped = _kendall_for(full, config.min_n, skip_reasons)
        reports.append(SegmentReport("full", full.n, tuple(full.weeks), desc, sw,
                                     kres, mag, skipped))

    return SegmentedAnalysis(
        component_id=series.component_id,
        segments=tuple(reports),
        mwu=tuple(comparisons),
        segmentation_applied=segmented,
        skip_reasons=tuple(skip_reasons),
        alpha=config.alpha,
        min_n=config.min_n,
    )
