"""Nonparametric statistics: descriptive summaries, Shapiro-Wilk, Mann-Whitney U,
Kendall tau-b and magnitude labels."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from statistics import NormalDist
from typing import Optional, Sequence

from . import kernels

EXACT_MWU_MAX_N = 12
SW_MIN_N, SW_MAX_N = 3, 5000
MAGNITUDES = ("Very Weak", "Weak", "Moderate", "Strong")

_STD_NORMAL = NormalDist()


class DegenerateInputError(ValueError):
    """Input for which the requested statistic is undefined."""


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _finite(xs: Sequence[float], what: str) -> list[float]:
    out = [float(v) for v in xs]
    if any(math.isnan(v) or math.isinf(v) for v in out):
        raise ValueError(f"{what}: non-finite values")
    return out


# -- descriptive ----------------------------------------------------------------


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    std: Optional[float]
    min: float
    max: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DescriptiveStats":
        return cls(**d)


def describe(xs: Sequence[float]) -> DescriptiveStats:
    """N, mean, sample standard deviation (n-1), min and max.

    ``std`` is ``None`` for a single observation.
    """
    values = _finite(xs, "describe")
    n = len(values)
    if n == 0:
        raise ValueError("describe: empty input")
    mean = math.fsum(values) / n
    lo, hi = min(values), max(values)
    # keep mean inside [min, max] under rounding
    mean = min(max(mean, lo), hi)
    std = None
    if n > 1:
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    return DescriptiveStats(n, mean, std, lo, hi)


# -- Kendall tau-b --------------------------------------------------------------


@dataclass(frozen=True)
class KendallResult:
    tau_b: float
    p_value: float
    n: int
    concordant: int
    discordant: int
    ties_x: int
    ties_y: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "KendallResult":
        return cls(**d)


def _tie_sums(values):
    v1 = v2 = v3 = 0
    for t in Counter(values).values():
        v1 += t * (t - 1) * (2 * t + 5)
        v2 += t * (t - 1)
        v3 += t * (t - 1) * (t - 2)
    return v1, v2, v3


def kendall_variance(xs, ys) -> float:
    """Variance of ``S = nc - nd`` under independence, adjusted for ties."""
    n = len(xs)
    tx1, tx2, tx3 = _tie_sums(xs)
    ty1, ty2, ty3 = _tie_sums(ys)
    var = (n * (n - 1) * (2 * n + 5) - tx1 - ty1) / 18.0
    if n > 2:
        var += (tx3 * ty3) / (9.0 * n * (n - 1) * (n - 2))
    var += (tx2 * ty2) / (2.0 * n * (n - 1))
    return var


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> KendallResult:
    """Kendall's tau-b with a two-sided p from the tie-adjusted normal
    approximation of ``nc - nd``."""
    x = _finite(xs, "kendall_tau_b")
    y = _finite(ys, "kendall_tau_b")
    n = len(x)
    if len(y) != n:
        raise ValueError("kendall_tau_b: x and y differ in length")
    if n < 2:
        raise ValueError("kendall_tau_b: need at least 2 pairs")
    nc, nd, ties_x, ties_y, _ = kernels.kendall_counts(x, y)
    n0 = n * (n - 1) // 2
    if ties_x == n0 or ties_y == n0:
        raise DegenerateInputError("kendall_tau_b: a variable is constant, tau undefined")
    s = nc - nd
    tau = s / math.sqrt((n0 - ties_x) * (n0 - ties_y))
    tau = max(-1.0, min(1.0, tau))
    var = kendall_variance(x, y)
    p = 1.0 if var <= 0 else min(1.0, 2.0 * normal_sf(abs(s) / math.sqrt(var)))
    return KendallResult(tau, p, n, nc, nd, ties_x, ties_y)


# -- Mann-Whitney U ---------------------------------------------------------------


@dataclass(frozen=True)
class MwuResult:
    u_statistic: float
    p_value: float
    n1: int
    n2: int
    method: str

    @property
    def u_other(self) -> float:
        return self.n1 * self.n2 - self.u_statistic

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MwuResult":
        return cls(**d)


def average_ranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


def mwu_exact_p(u: float, n1: int, n2: int) -> float:
    """Two-sided exact p: share of assignments at least as far from n1*n2/2."""
    counts = kernels.mwu_null_counts(n1, n2)
    dev = abs(2 * u - n1 * n2)
    extreme = sum(c for k, c in enumerate(counts) if abs(2 * k - n1 * n2) >= dev)
    return extreme / math.comb(n1 + n2, n1)


def mwu_normal_p(u: float, n1: int, n2: int, tie_term: float) -> float:
    """Normal approximation with tie-corrected variance and 0.5 continuity
    correction; ``tie_term`` is the sum of ``t**3 - t`` over tie groups."""
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, 2.0 * normal_sf(z))


def mann_whitney_u(
    xs: Sequence[float], ys: Sequence[float], method: str = "auto"
) -> MwuResult:
    """Two-sided Mann-Whitney U test; ``u_statistic`` is U for ``xs``.

    ``method="auto"`` uses the exact null distribution when n1+n2 <= 12 and
    the pooled sample has no ties, otherwise the normal approximation.
    """
    x = _finite(xs, "mann_whitney_u")
    y = _finite(ys, "mann_whitney_u")
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise ValueError("mann_whitney_u: both groups must be non-empty")
    pooled = x + y
    ranks = average_ranks(pooled)
    u = math.fsum(ranks[:n1]) - n1 * (n1 + 1) / 2.0
    tie_term = sum(t ** 3 - t for t in Counter(pooled).values())
    if method == "auto":
        method = "exact" if (n1 + n2 <= EXACT_MWU_MAX_N and tie_term == 0) else "normal-approx"
    if method == "exact":
        if tie_term:
            raise ValueError("mann_whitney_u: exact method requires tie-free data")
        p = mwu_exact_p(u, n1, n2)
    elif method == "normal-approx":
        p = mwu_normal_p(u, n1, n2, tie_term) if n1 + n2 > 1 else 1.0
    else:
        raise ValueError(f"unknown method {method!r}")
    return MwuResult(u, p, n1, n2, method)


# -- Shapiro-Wilk (Royston 1995, AS R94) --------------------------------------

_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.5440, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coefs, x):
    result = 0.0
    for c in reversed(coefs):
        result = result * x + c
    return result


@dataclass(frozen=True)
class SwResult:
    w_statistic: float
    p_value: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SwResult":
        return cls(**d)


def _sw_coefficients(n: int) -> list[float]:
    nn2 = n // 2
    if n == 3:
        return [math.sqrt(0.5)]
    an25 = n + 0.25
    m = [_STD_NORMAL.inv_cdf((i - 0.375) / an25) for i in range(1, nn2 + 1)]
    summ2 = 2.0 * sum(v * v for v in m)
    ssumm2 = math.sqrt(summ2)
    rsn = 1.0 / math.sqrt(n)
    a1 = _poly(_C1, rsn) - m[0] / ssumm2
    a = list(m)
    if n > 5:
        first = 2
        a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
        fac = math.sqrt((summ2 - 2 * m[0] ** 2 - 2 * m[1] ** 2) / (1 - 2 * a1 ** 2 - 2 * a2 ** 2))
        a[1] = a2
    else:
        first = 1
        fac = math.sqrt((summ2 - 2 * m[0] ** 2) / (1 - 2 * a1 ** 2))
    a[0] = a1
    for i in range(first, nn2):
        a[i] = -m[i] / fac
    return a


def shapiro_wilk(xs: Sequence[float]) -> SwResult:
    """Shapiro-Wilk W and p-value via Royston's polynomial approximations."""
    x = sorted(_finite(xs, "shapiro_wilk"))
    n = len(x)
    if not SW_MIN_N <= n <= SW_MAX_N:
        raise DegenerateInputError(f"shapiro_wilk: n={n} outside [{SW_MIN_N}, {SW_MAX_N}]")
    rng = x[-1] - x[0]
    if rng < 1e-19 * max(1.0, abs(x[0])):
        raise DegenerateInputError("shapiro_wilk: constant sample, W undefined")
    a = _sw_coefficients(n)
    nn2 = n // 2
    # antisymmetric coefficient vector over the sorted sample
    coef = [0.0] * n
    for i in range(nn2):
        coef[i] = -a[i]
        coef[n - 1 - i] = a[i]
    scaled = [v / rng for v in x]
    sa = math.fsum(coef) / n
    sx = math.fsum(scaled) / n
    ssa = ssx = sax = 0.0
    for c, v in zip(coef, scaled):
        asa = c - sa
        xsx = v - sx
        ssa += asa * asa
        ssx += xsx * xsx
        sax += asa * xsx
    ssassx = math.sqrt(ssa * ssx)
    w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx)
    w = 1.0 - w1
    w = min(max(w, 0.0), 1.0)

    if n == 3:
        pw = (6.0 / math.pi) * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return SwResult(w, min(max(pw, 0.0), 1.0), n)
    y = math.log(w1) if w1 > 0 else -math.inf
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return SwResult(w, 1e-99, n)
        y = -math.log(gamma - y)
        m = _poly(_C3, n)
        s = math.exp(_poly(_C4, n))
    else:
        lnn = math.log(n)
        m = _poly(_C5, lnn)
        s = math.exp(_poly(_C6, lnn))
    if y == -math.inf:
        return SwResult(w, 1.0, n)
    return SwResult(w, normal_sf((y - m) / s), n)


# -- magnitude ----------------------------------------------------------------------


def classify_magnitude(tau_b: float) -> str:
    """Label |tau| after rounding half away from zero to two decimals.

    Bins: < 0.10 Very Weak, < 0.20 Weak, < 0.30 Moderate, otherwise Strong.
    The cut points are inferred from published labels, not stated anywhere.
    """
    r = Decimal(repr(abs(float(tau_b)))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    if r < Decimal("0.10"):
        return "Very Weak"
    if r < Decimal("0.20"):
        return "Weak"
    if r < Decimal("0.30"):
        return "Moderate"
    return "Strong"
