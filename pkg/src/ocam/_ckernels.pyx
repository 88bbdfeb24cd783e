# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled rank-statistics kernels; same contract as ``_pykernels``."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()

cdef int MAX_EXACT_N = 60


cdef int64_t _tie_pairs(const double[:] v) noexcept nogil:
    cdef Py_ssize_t i, n = v.shape[0]
    cdef int64_t total = 0, run = 1
    for i in range(1, n):
        if v[i] == v[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


cdef int64_t _joint_tie_pairs(const double[:] a, const double[:] b) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef int64_t total = 0, run = 1
    for i in range(1, n):
        if a[i] == a[i - 1] and b[i] == b[i - 1]:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


cdef int64_t _merge_count(double[:] v, double[:] buf) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef int64_t inv = 0
    cdef double[:] src = v
    cdef double[:] dst = buf
    cdef double[:] tmp
    cdef bint swapped = False
    while width < n:
        lo = 0
        while lo < n:
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i = lo
            j = mid
            k = lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    dst[k] = src[j]
                    inv += mid - i
                    j += 1
                else:
                    dst[k] = src[i]
                    i += 1
                k += 1
            while i < mid:
                dst[k] = src[i]
                i += 1
                k += 1
            while j < hi:
                dst[k] = src[j]
                j += 1
                k += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        swapped = not swapped
        width *= 2
    if swapped:
        v[:] = src
    return inv


def kendall_counts(x, y):
    """Pair counts ``(concordant, discordant, ties_x, ties_y, ties_xy)``."""
    cdef cnp.ndarray[double, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] ya = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0]
    if ya.shape[0] != n:
        raise ValueError("x and y must have equal length")
    order = np.lexsort((ya, xa))
    cdef double[:] xs = xa[order]
    cdef double[:] ys = ya[order].copy()
    cdef double[:] buf = np.empty(n, dtype=np.float64)
    cdef int64_t tx, txy, ty, dis, total
    with nogil:
        tx = _tie_pairs(xs)
        txy = _joint_tie_pairs(xs, ys)
        dis = _merge_count(ys, buf)
        ty = _tie_pairs(ys)
    total = <int64_t>n * (n - 1) // 2
    return int(total - tx - ty + txy - dis), int(dis), int(tx), int(ty), int(txy)


def mwu_null_counts(int n1, int n2):
    """Number of group assignments giving each U in ``0..n1*n2`` (no ties)."""
    if n1 < 0 or n2 < 0:
        raise ValueError("group sizes must be non-negative")
    if n1 + n2 > MAX_EXACT_N:
        raise ValueError(f"exact distribution limited to n1+n2 <= {MAX_EXACT_N}")
    cdef Py_ssize_t size = n1 * n2 + 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] arr = np.zeros(size, dtype=np.int64)
    cdef int64_t[:] c = arr
    cdef Py_ssize_t k, u, shift
    c[0] = 1
    with nogil:
        for k in range(1, n1 + 1):
            shift = n2 + k
            u = size - 1
            while u >= shift:
                c[u] -= c[u - shift]
                u -= 1
            for u in range(k, size):
                c[u] += c[u - k]
    return [int(v) for v in arr]
