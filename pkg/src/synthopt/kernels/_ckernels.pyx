# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures, scan order and tie-breaking as the numpy versions.
"""
import math

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isinf

from synthopt.kernels._pykernels import mitm_prepare, LOW_BITS

cnp.import_array()

cdef double IMPROVE_EPS = 1e-12


def held_karp(dist):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t size = (<Py_ssize_t>1) << m
    cdef double[:, ::1] dp = np.full((size, m), INFINITY)
    cdef cnp.int8_t[:, ::1] parent = np.full((size, m), -1, dtype=np.int8)
    cdef Py_ssize_t mask, prev, j, k, best_k
    cdef double best, c
    for j in range(m):
        dp[(<Py_ssize_t>1) << j, j] = d[0, j + 1]
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        for j in range(m):
            if not (mask >> j) & 1:
                continue
            prev = mask ^ ((<Py_ssize_t>1) << j)
            best = INFINITY
            best_k = -1
            for k in range(m):
                c = dp[prev, k] + d[k + 1, j + 1]
                if best_k < 0 or c < best:
                    best = c
                    best_k = k
            dp[mask, j] = best
            parent[mask, j] = <cnp.int8_t>best_k
    cdef Py_ssize_t full = size - 1
    cdef Py_ssize_t end = -1
    best = INFINITY
    for j in range(m):
        c = dp[full, j] + d[j + 1, 0]
        if end < 0 or c < best:
            best = c
            end = j
    if isinf(best):
        return math.inf, None
    path = []
    mask = full
    j = end
    while j >= 0:
        path.append(j + 1)
        k = parent[mask, j]
        mask ^= (<Py_ssize_t>1) << j
        j = k
    path.reverse()
    return float(best), [0] + path


def partition_enumerate(weights):
    cdef list w = [int(x) for x in weights]
    cdef long long total = sum(w)
    cdef list rest = w[1:]
    cdef Py_ssize_t k = min(len(rest), LOW_BITS)
    cdef Py_ssize_t nh = len(rest) - k
    cdef cnp.int64_t[::1] low = np.zeros((<Py_ssize_t>1) << k, dtype=np.int64)
    cdef cnp.int64_t[::1] high = np.asarray(rest[k:], dtype=np.int64)
    cdef Py_ssize_t i, b, h, width = 1
    cdef long long wi, hs, d, best = -1, floor = total % 2
    cdef long long best_mask = 0
    for b in range(k):
        wi = rest[b]
        for i in range(width):
            low[width + i] = low[i] + wi
        width *= 2
    for h in range((<Py_ssize_t>1) << nh):
        hs = 0
        for b in range(nh):
            if (h >> b) & 1:
                hs += high[b]
        for i in range(width):
            d = total - 2 * (low[i] + hs)
            if d < 0:
                d = -d
            if best < 0 or d < best:
                best = d
                best_mask = ((<long long>h << k) | i) << 1
                if best == floor:
                    break
        if best == floor:
            break
    return int(best), int(best_mask)


def partition_mitm(weights):
    total = sum(int(x) for x in weights)
    left_np, right_np, order_np, half = mitm_prepare(weights)
    cdef cnp.int64_t[::1] left = np.ascontiguousarray(left_np)
    cdef cnp.int64_t[::1] right2 = np.ascontiguousarray(right_np)
    cdef cnp.int64_t[::1] order = np.ascontiguousarray(order_np)
    cdef long long t = total
    cdef Py_ssize_t nl = left.shape[0], nr = right2.shape[0]
    cdef Py_ssize_t a, lo, hi, mid, pos, pick, best_a = -1, best_pick = 0
    cdef long long r, d_hi, d_lo, diff, best = 0
    for a in range(nl):
        r = t - 2 * left[a]
        lo = 0
        hi = nr
        while lo < hi:
            mid = (lo + hi) >> 1
            if right2[mid] < r:
                lo = mid + 1
            else:
                hi = mid
        pos = lo
        hi = pos if pos < nr - 1 else nr - 1
        lo = pos - 1 if pos > 0 else 0
        d_hi = right2[hi] - r
        if d_hi < 0:
            d_hi = -d_hi
        d_lo = r - right2[lo]
        if d_lo < 0:
            d_lo = -d_lo
        if d_hi <= d_lo:
            pick = hi
            diff = d_hi
        else:
            pick = lo
            diff = d_lo
        if best_a < 0 or diff < best:
            best = diff
            best_a = a
            best_pick = pick
    mask = (best_a << 1) | (int(order[best_pick]) << (1 + half))
    return int(best), mask


def two_opt(dist, tour):
    cdef double[:, ::1] d = np.ascontiguousarray(dist, dtype=np.float64)
    cdef cnp.int64_t[::1] t = np.asarray(tour, dtype=np.int64).copy()
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, lo, hi
    cdef cnp.int64_t a, b, c, e, tmp
    cdef double delta
    cdef bint improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a = t[i]
                b = t[i + 1]
                c = t[j]
                e = t[(j + 1) % n]
                delta = (d[a, c] + d[b, e]) - (d[a, b] + d[c, e])
                if delta < -IMPROVE_EPS:
                    lo = i + 1
                    hi = j
                    while lo < hi:
                        tmp = t[lo]
                        t[lo] = t[hi]
                        t[hi] = tmp
                        lo += 1
                        hi -= 1
                    improved = True
    return [int(x) for x in t]
