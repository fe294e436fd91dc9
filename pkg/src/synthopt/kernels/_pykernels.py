"""Numpy / pure-Python implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same
signature, the same scan order and the same tie-breaking, so both
backends return identical results (not just equal optima).
"""
import math

import numpy as np

IMPROVE_EPS = 1e-12
LOW_BITS = 16


def held_karp(dist):
    """Exact shortest Hamiltonian cycle through node 0.

    ``dist`` is a float64 (n, n) matrix with ``inf`` on forbidden edges.
    Returns ``(cost, tour)``; ``tour`` starts at 0 and is ``None`` when
    no finite cycle exists.
    """
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    n = dist.shape[0]
    m = n - 1
    inner = dist[1:, 1:]
    size = 1 << m
    dp = np.full((size, m), math.inf)
    parent = np.full((size, m), -1, dtype=np.int64)
    for j in range(m):
        dp[1 << j, j] = dist[0, j + 1]
    bits = [1 << j for j in range(m)]
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        js = [j for j in range(m) if mask & bits[j]]
        prev = dp[[mask ^ bits[j] for j in js]]
        cand = prev + inner[:, js].T
        best = np.argmin(cand, axis=1)
        dp[mask, js] = cand[np.arange(len(js)), best]
        parent[mask, js] = best
    full = size - 1
    closing = dp[full] + dist[1:, 0]
    end = int(np.argmin(closing))
    cost = float(closing[end])
    if math.isinf(cost):
        return math.inf, None
    path = []
    mask = full
    j = end
    while j >= 0:
        path.append(j + 1)
        k = int(parent[mask, j])
        mask ^= bits[j]
        j = k
    path.reverse()
    return cost, [0] + path


def _subset_sums(weights):
    sums = np.zeros(1, dtype=np.int64)
    for w in weights:
        sums = np.concatenate((sums, sums + np.int64(w)))
    return sums


def partition_enumerate(weights):
    """Best bipartition by exhaustive enumeration.

    Item 0 stays in the first heap; the remaining items are enumerated.
    Returns ``(discrepancy, mask)`` where bit ``i`` of ``mask`` puts item
    ``i`` in the second heap. Among optimal masks the smallest is returned.
    """
    w = [int(x) for x in weights]
    total = sum(w)
    rest = w[1:]
    k = min(len(rest), LOW_BITS)
    low = _subset_sums(rest[:k])
    high = rest[k:]
    floor = total % 2
    best = None
    best_mask = 0
    for h in range(1 << len(high)):
        hs = sum(high[b] for b in range(len(high)) if h >> b & 1)
        diffs = np.abs(total - 2 * (low + hs))
        i = int(np.argmin(diffs))
        d = int(diffs[i])
        if best is None or d < best:
            best = d
            best_mask = ((h << k) | i) << 1
            if best == floor:
                break
    return best, best_mask


def mitm_prepare(weights):
    """Shared setup for the meet-in-the-middle kernel.

    Returns the half sums of the first half, the sorted doubled sums of
    the second half with their original subset indices, and the split.
    """
    w = [int(x) for x in weights]
    rest = w[1:]
    half = len(rest) // 2
    left = _subset_sums(rest[:half])
    right = _subset_sums(rest[half:])
    order = np.argsort(right, kind="stable")
    return left, 2 * right[order], order.astype(np.int64), half


def partition_mitm(weights):
    """Best bipartition by meet-in-the-middle over the two item halves."""
    total = sum(int(x) for x in weights)
    left, right2, order, half = mitm_prepare(weights)
    r = total - 2 * left
    pos = np.searchsorted(right2, r, side="left")
    hi = np.minimum(pos, len(right2) - 1)
    lo = np.maximum(pos - 1, 0)
    d_hi = np.abs(right2[hi] - r)
    d_lo = np.abs(r - right2[lo])
    take_hi = d_hi <= d_lo
    pick = np.where(take_hi, hi, lo)
    diffs = np.where(take_hi, d_hi, d_lo)
    a = int(np.argmin(diffs))
    mask = (a << 1) | (int(order[pick[a]]) << (1 + half))
    return int(diffs[a]), mask


def two_opt(dist, tour):
    """First-improvement 2-opt until no improving exchange remains."""
    d = np.asarray(dist, dtype=np.float64).tolist()
    t = list(tour)
    n = len(t)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a, b, c, e = t[i], t[i + 1], t[j], t[(j + 1) % n]
                delta = (d[a][c] + d[b][e]) - (d[a][b] + d[c][e])
                if delta < -IMPROVE_EPS:
                    t[i + 1:j + 1] = t[i + 1:j + 1][::-1]
                    improved = True
    return t
