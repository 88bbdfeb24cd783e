import json
import math
from pathlib import Path

import pytest
from hypothesis import assume, given, settings, strategies as st

from ocam.stats import (
    DegenerateInputError,
    classify_magnitude,
    describe,
    kendall_tau_b,
    mann_whitney_u,
    shapiro_wilk,
)
from ocam.synth.oracles import brute_force_tau, permutation_mwu_p
from ocam.synth.rng import SplitMix64

DATA = Path(__file__).parent / "data"
finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


# -- descriptive

def _kahan_mean(xs):
    s = c = 0.0
    for v in xs:
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
    return s / len(xs)


@given(st.lists(finite, min_size=1, max_size=200))
def test_describe_matches_compensated_sum(xs):
    d = describe(xs)
    assert d.n == len(xs)
    assert d.min == min(xs) and d.max == max(xs)
    assert d.min <= d.mean <= d.max
    assert d.mean == pytest.approx(_kahan_mean(xs), rel=1e-9, abs=1e-6)
    if len(xs) == 1:
        assert d.std is None
    else:
        assert d.std >= 0


def test_describe_example():
    d = describe([2, 4, 4, 4, 5, 5, 7, 9])
    assert d.mean == 5.0
    assert d.std == pytest.approx(math.sqrt(32 / 7))
    with pytest.raises(ValueError):
        describe([])
    with pytest.raises(ValueError):
        describe([1.0, float("nan")])


# -- Kendall

def test_kendall_tied_example():
    r = kendall_tau_b([1, 2, 2, 3], [1, 3, 2, 4])
    assert (r.concordant, r.discordant, r.ties_x, r.ties_y) == (5, 0, 1, 0)
    assert r.tau_b == pytest.approx(5 / math.sqrt(30), abs=1e-15)


def test_kendall_extremes_and_degenerate():
    assert kendall_tau_b([1, 2, 3, 4, 5], [5, 4, 3, 2, 1]).tau_b == -1.0
    assert kendall_tau_b([1, 2, 3, 4, 5], [1, 2, 3, 4, 5]).tau_b == 1.0
    with pytest.raises(DegenerateInputError):
        kendall_tau_b([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        kendall_tau_b([1, 2], [1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=2, max_size=40))
def test_kendall_matches_brute_force_and_is_bounded(pairs):
    x, y = [p[0] for p in pairs], [p[1] for p in pairs]
    nc, nd, tx, ty, tau = brute_force_tau(x, y)
    assume(tau is not None)
    r = kendall_tau_b(x, y)
    assert abs(r.tau_b - tau) <= 1e-12
    assert -1 <= r.tau_b <= 1 and 0 <= r.p_value <= 1
    # swapping the variables and reversing one flip nothing but the sign
    assert kendall_tau_b(y, x).tau_b == pytest.approx(r.tau_b, abs=1e-12)
    assert kendall_tau_b(x, [-v for v in y]).tau_b == pytest.approx(-r.tau_b, abs=1e-12)


def test_kendall_p_matches_scipy_asymptotic():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = SplitMix64(5)
    for _ in range(30):
        n = 5 + rng.randbelow(60)
        x = [rng.randbelow(8) for _ in range(n)]
        y = [rng.randbelow(8) + 0.1 * x[i] for i in range(n)]
        ref = scipy_stats.kendalltau(x, y, method="asymptotic")
        r = kendall_tau_b(x, y)
        assert r.tau_b == pytest.approx(ref.statistic, abs=1e-12)
        assert r.p_value == pytest.approx(ref.pvalue, abs=1e-10)


# -- Mann-Whitney U

def test_mwu_complete_separation_three_vs_three():
    r = mann_whitney_u([1, 2, 3], [4, 5, 6])
    assert r.method == "exact"
    assert r.u_statistic == 0
    assert r.p_value == pytest.approx(0.1, abs=1e-15)


def test_mwu_auto_switches_to_normal_on_ties_or_size():
    assert mann_whitney_u([1, 2, 2], [3, 4, 5]).method == "normal-approx"
    assert mann_whitney_u(list(range(7)), list(range(7, 13))).method == "normal-approx"
    with pytest.raises(ValueError):
        mann_whitney_u([1, 2, 2], [3, 4], method="exact")
    with pytest.raises(ValueError):
        mann_whitney_u([], [1])


@settings(max_examples=150, deadline=None)
@given(st.lists(finite, min_size=1, max_size=15), st.lists(finite, min_size=1, max_size=15))
def test_mwu_invariants(xs, ys):
    r = mann_whitney_u(xs, ys)
    s = mann_whitney_u(ys, xs)
    assert r.u_statistic + s.u_statistic == pytest.approx(len(xs) * len(ys))
    assert r.p_value == pytest.approx(s.p_value, abs=1e-12)
    assert 0 <= r.p_value <= 1


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=12),
       st.lists(st.integers(-50, 50), min_size=1, max_size=12))
def test_mwu_rank_invariance(xs, ys):
    r = mann_whitney_u(xs, ys)
    shifted = mann_whitney_u([v * 2 + 3 for v in xs], [v * 2 + 3 for v in ys])
    assert shifted.u_statistic == r.u_statistic
    assert shifted.p_value == r.p_value


def test_mwu_exact_matches_permutation():
    rng = SplitMix64(99)
    for _ in range(60):
        n1 = 1 + rng.randbelow(8)
        n2 = 1 + rng.randbelow(12 - n1)
        vals = []
        while len(vals) < n1 + n2:
            v = rng.randbelow(1000)
            if v not in vals:
                vals.append(v)
        r = mann_whitney_u(vals[:n1], vals[n1:], method="exact")
        assert r.p_value == pytest.approx(permutation_mwu_p(vals[:n1], vals[n1:]), abs=1e-12)


def test_mwu_normal_matches_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = SplitMix64(3)
    for _ in range(30):
        xs = [rng.randbelow(10) for _ in range(5 + rng.randbelow(30))]
        ys = [rng.randbelow(12) for _ in range(5 + rng.randbelow(30))]
        ref = scipy_stats.mannwhitneyu(xs, ys, method="asymptotic", use_continuity=True)
        r = mann_whitney_u(xs, ys, method="normal-approx")
        assert r.u_statistic == ref.statistic
        assert r.p_value == pytest.approx(ref.pvalue, abs=1e-10)


# -- Shapiro-Wilk

def _reference():
    return json.loads((DATA / "shapiro_reference.json").read_text())["datasets"]


@pytest.mark.parametrize("case", _reference(), ids=lambda c: f"{c['kind']}-{c['n']}")
def test_shapiro_wilk_reference(case):
    r = shapiro_wilk(case["data"])
    assert abs(r.w_statistic - case["w"]) <= 1e-3
    assert abs(r.p_value - case["p"]) <= 5e-3


def test_shapiro_wilk_normal_and_bimodal():
    rng = SplitMix64(2024)
    normal = [rng.gauss() for _ in range(20)]
    assert shapiro_wilk(normal).p_value > 0.05
    bimodal = [rng.gauss() * 0.3 + (4 if i % 2 else -4) for i in range(50)]
    assert shapiro_wilk(bimodal).p_value < 0.01


def test_shapiro_wilk_degenerate():
    with pytest.raises(DegenerateInputError):
        shapiro_wilk([1.0, 1.0, 1.0, 1.0])
    with pytest.raises(DegenerateInputError):
        shapiro_wilk([1.0, 2.0])


# -- magnitude

@pytest.mark.parametrize("tau,label", [
    (0.0, "Very Weak"), (0.094, "Very Weak"), (0.095, "Weak"), (-0.099, "Weak"),
    (0.194, "Weak"), (0.195, "Moderate"), (0.294, "Moderate"), (-0.295, "Strong"), (1.0, "Strong"),
])
def test_magnitude_rounding_boundaries(tau, label):
    assert classify_magnitude(tau) == label


@given(st.floats(min_value=-1, max_value=1))
def test_magnitude_is_symmetric_and_monotone(t):
    order = ["Very Weak", "Weak", "Moderate", "Strong"]
    assert classify_magnitude(t) == classify_magnitude(-t)
    bigger = min(1.0, abs(t) + 0.05)
    assert order.index(classify_magnitude(bigger)) >= order.index(classify_magnitude(t))
