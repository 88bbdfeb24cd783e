import pytest

from conftest import make_series
from ocam.pipeline import AnalysisConfig, run_analysis, segment_labels, segment_series, split_at
from ocam.synth.rng import SplitMix64


def _noisy(n, seed, slope=0.0, shift=0.0):
    rng = SplitMix64(seed)
    degrees = [rng.uniform(0, 100) for _ in range(n)]
    tdds = [shift + 1.0 + slope * d / 100 + 0.05 * rng.gauss() for d in degrees]
    return degrees, tdds


def test_segment_boundaries():
    s = make_series([1, 2, 3, 4], [1, 2, 3, 4], weeks=[59, 60, 61, 62])
    before, after = segment_series(s, 61)
    assert before.weeks == [59, 60] and after.weeks == [61, 62]
    assert [seg.label for seg in split_at(s, [60, 62])] == ["before", "after", "after_2"]
    assert segment_labels(1) == ["full"]


def test_no_split_gives_single_full_report():
    d, t = _noisy(30, 1, slope=-0.5)
    a = run_analysis(make_series(d, t), config=AnalysisConfig())
    assert not a.segmentation_applied and a.mwu == ()
    assert [s.label for s in a.segments] == ["full"]
    assert a.segment("full").kendall is not None


def test_significant_shift_triggers_segmentation():
    d1, t1 = _noisy(30, 2, slope=-0.8)
    d2, t2 = _noisy(30, 3, slope=0.8, shift=1.0)
    s = make_series(d1 + d2, t1 + t2)
    a = run_analysis(s, split_weeks=[31])
    assert a.mwu[0].results["tdd"].p_value < 0.05
    assert a.segmentation_applied
    assert a.segment("before").kendall.tau_b < 0 < a.segment("after").kendall.tau_b
    assert a.segment("full") is None


def test_insignificant_split_correlates_full_series():
    d, t = _noisy(60, 4, slope=-0.5)
    a = run_analysis(make_series(d, t), split_weeks=[31])
    assert not any(r.p_value < 0.05 for r in a.mwu[0].results.values())
    assert not a.segmentation_applied
    assert a.segment("before").kendall is None and a.segment("before").descriptive["degree"].n == 30
    assert a.segment("full").kendall.n == 60


def test_short_pre_split_segment_is_skipped():
    # three observations before the split, as for a component created just before it
    d, t = _noisy(33, 5, slope=-0.7)
    a = run_analysis(make_series(d, t), split_weeks=[4])
    assert a.mwu[0].skipped is not None
    assert a.segmentation_applied
    before = a.segment("before")
    assert before.n == 3 and before.kendall is None and "lack or limited" in before.skipped
    assert a.segment("after").kendall.n == 30


def test_empty_pre_split_segment():
    d, t = _noisy(20, 6)
    a = run_analysis(make_series(d, t, weeks=list(range(70, 90))), split_weeks=[61])
    assert a.segment("before").n == 0
    assert a.segment("after").kendall is not None


def test_forced_and_disabled_segmentation():
    d, t = _noisy(40, 7)
    s = make_series(d, t)
    assert run_analysis(s, config=AnalysisConfig(force_segmentation=True), split_weeks=[21]).segmentation_applied
    d1, t1 = _noisy(30, 2, slope=-0.8)
    d2, t2 = _noisy(30, 3, slope=0.8, shift=1.0)
    off = run_analysis(make_series(d1 + d2, t1 + t2), config=AnalysisConfig(no_segmentation=True),
                       split_weeks=[31])
    assert not off.segmentation_applied and off.segment("full").kendall is not None


def test_perfect_inverse_relationship():
    a = run_analysis(make_series(list(range(10)), [10 - v for v in range(10)]))
    k = a.segment("full").kendall
    assert k.tau_b == -1.0 and k.p_value < 0.001
    assert a.segment("full").magnitude == "Strong"


def test_constant_variable_is_reported_not_crashed():
    a = run_analysis(make_series([50.0] * 10, list(range(10))))
    assert a.segment("full").kendall is None
    assert any("undefined" in r for r in a.skip_reasons)


def test_analysis_is_deterministic():
    d, t = _noisy(50, 9, slope=0.3)
    s = make_series(d, t)
    assert run_analysis(s, split_weeks=[20]) == run_analysis(s, split_weeks=[20])
