"""Pure-Python rank-statistics kernels (fallback for ``_ckernels``)."""
from __future__ import annotations

from math import comb


def _tie_pairs(sorted_values):
    """Number of tied pairs in an already sorted sequence."""
    total, run = 0, 1
    for i in range(1, len(sorted_values)):
        if sorted_values[i] == sorted_values[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def _count_inversions(values):
    """Sort ``values`` in place (merge sort) and return the strict inversion count."""
    n = len(values)
    buf = [0.0] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if values[j] < values[i]:
                    buf[k] = values[j]
                    inversions += mid - i
                    j += 1
                else:
                    buf[k] = values[i]
                    i += 1
                k += 1
            while i < mid:
                buf[k] = values[i]
                i += 1
                k += 1
            while j < hi:
                buf[k] = values[j]
                j += 1
                k += 1
        values, buf = buf, values
        width *= 2
    return inversions, values


def kendall_counts(x, y):
    """Pair counts for Kendall's tau in O(n log n).

    Returns ``(concordant, discordant, ties_x, ties_y, ties_xy)`` where the
    tie counts are numbers of pairs tied in x (including joint ties), tied in
    y (including joint ties), and tied in both.
    """
    n = len(x)
    if len(y) != n:
        raise ValueError("x and y must have equal length")
    pairs = sorted(zip(x, y))
    xs = [p[0] for p in pairs]
    ties_x = _tie_pairs(xs)
    ties_xy = _tie_pairs(pairs)
    discordant, ys = _count_inversions([p[1] for p in pairs])
    ties_y = _tie_pairs(ys)
    total = n * (n - 1) // 2
    concordant = total - ties_x - ties_y + ties_xy - discordant
    return concordant, discordant, ties_x, ties_y, ties_xy


def mwu_null_counts(n1, n2):
    """Number of group assignments giving each U in ``0..n1*n2`` (no ties).

    Coefficients of the Gaussian binomial ``[n1+n2 choose n1]_q``, built as
    the product of ``(1 - q**(n2+k)) / (1 - q**k)`` for ``k = 1..n1``.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("group sizes must be non-negative")
    size = n1 * n2 + 1
    c = [0] * size
    c[0] = 1
    for k in range(1, n1 + 1):
        shift = n2 + k
        for u in range(size - 1, shift - 1, -1):
            c[u] -= c[u - shift]
        for u in range(k, size):
            c[u] += c[u - k]
    assert sum(c) == comb(n1 + n2, n1)
    return c
