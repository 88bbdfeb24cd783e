"""Definitional brute-force oracles used to cross-check the fast paths."""
from __future__ import annotations

import itertools
import math
from datetime import date
from typing import Iterable, Optional, Sequence

from ..model import DEFAULT_EPOCH, TdIssueRecord, to_utc, week_start

PERMUTATION_MAX_N = 14


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def brute_force_tau(xs: Sequence[float], ys: Sequence[float]):
    """Enumerate all pairs: ``(nc, nd, ties_x, ties_y, tau_b)``.

    ``tau_b`` is ``None`` when either variable is constant.
    """
    n = len(xs)
    if len(ys) != n:
        raise ValueError("length mismatch")
    nc = nd = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            sx = _sign(xs[i] - xs[j])
            sy = _sign(ys[i] - ys[j])
            if sx == 0:
                tx += 1
            if sy == 0:
                ty += 1
            if sx * sy > 0:
                nc += 1
            elif sx * sy < 0:
                nd += 1
    n0 = n * (n - 1) // 2
    if n0 == tx or n0 == ty:
        return nc, nd, tx, ty, None
    return nc, nd, tx, ty, (nc - nd) / math.sqrt((n0 - tx) * (n0 - ty))


def _u_by_pairs(a: Sequence[float], b: Sequence[float]) -> float:
    """U for ``a`` counted pairwise: wins score 1, ties 1/2."""
    u = 0.0
    for x in a:
        for y in b:
            if x > y:
                u += 1.0
            elif x == y:
                u += 0.5
    return u


def permutation_mwu_p(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Exact two-sided p of the Mann-Whitney U statistic by enumerating every
    assignment of the pooled sample to groups of the observed sizes."""
    n1, n2 = len(xs), len(ys)
    if n1 == 0 or n2 == 0:
        raise ValueError("both groups must be non-empty")
    if n1 + n2 > PERMUTATION_MAX_N:
        raise ValueError(f"enumeration limited to n1+n2 <= {PERMUTATION_MAX_N}")
    pooled = list(xs) + list(ys)
    centre2 = n1 * n2
    observed = abs(2 * _u_by_pairs(xs, ys) - centre2)
    extreme = total = 0
    idx = range(n1 + n2)
    for chosen in itertools.combinations(idx, n1):
        picked = set(chosen)
        a = [pooled[i] for i in chosen]
        b = [pooled[i] for i in idx if i not in picked]
        total += 1
        if abs(2 * _u_by_pairs(a, b) - centre2) >= observed:
            extreme += 1
    return extreme / total


def brute_force_td_stock(
    issues: Iterable[TdIssueRecord], week: int, epoch: date = DEFAULT_EPOCH
) -> float:
    """TD minutes counted at ``week``, rescanning every issue from scratch.

    Works on instants rather than week indices: an issue counts when it was
    introduced before the week ends and not removed before the week ends.
    """
    end = week_start(week + 1, epoch)
    open_minutes = []
    for i in issues:
        if to_utc(i.introduced_at) >= end:
            continue
        if i.removed_at is not None and to_utc(i.removed_at) < end:
            continue
        open_minutes.append(i.remediation_minutes)
    return math.fsum(open_minutes)
