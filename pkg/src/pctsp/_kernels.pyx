# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the bitmask dynamic programs."""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def held_karp(double[:, ::1] dist):
    """Shortest root paths over subsets; vertex 0 is the root.

    Returns ``(dp, parent)`` where ``dp[mask, j]`` is the cheapest path that
    starts at the root, visits exactly the non-root vertices in ``mask``
    (vertex ``i`` is bit ``i - 1``) and ends at vertex ``j + 1``.
    """
    cdef Py_ssize_t k = dist.shape[0] - 1
    cdef Py_ssize_t size = 1 << k
    dp_arr = np.full((size, max(k, 1)), np.inf)
    parent_arr = np.full((size, max(k, 1)), -1, dtype=np.int8)
    if k == 0:
        return dp_arr, parent_arr
    cdef double[:, ::1] dp = dp_arr
    cdef cnp.int8_t[:, ::1] parent = parent_arr
    cdef Py_ssize_t mask, j, nxt, nmask
    cdef double base, val
    for j in range(k):
        dp[1 << j, j] = dist[0, j + 1]
    for mask in range(1, size):
        for j in range(k):
            if not (mask >> j) & 1:
                continue
            base = dp[mask, j]
            if base == INFINITY:
                continue
            for nxt in range(k):
                if (mask >> nxt) & 1:
                    continue
                nmask = mask | (1 << nxt)
                val = base + dist[j + 1, nxt + 1]
                if val < dp[nmask, nxt]:
                    dp[nmask, nxt] = val
                    parent[nmask, nxt] = <cnp.int8_t>j
    return dp_arr, parent_arr


def matching_dp(double[:, ::1] weights):
    """Exact minimum-weight perfect matching by subset DP.

    Returns ``(value, partner)`` with ``partner[mask]`` the vertex paired with
    the lowest set bit of ``mask`` in an optimal matching of ``mask``.
    """
    cdef Py_ssize_t k = weights.shape[0]
    cdef Py_ssize_t size = 1 << k
    best_arr = np.full(size, np.inf)
    partner_arr = np.full(size, -1, dtype=np.int8)
    cdef double[::1] best = best_arr
    cdef cnp.int8_t[::1] partner = partner_arr
    cdef Py_ssize_t mask, i, j, rest
    cdef double val
    best[0] = 0.0
    for mask in range(1, size):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        for j in range(i + 1, k):
            if not (mask >> j) & 1:
                continue
            rest = mask ^ (1 << i) ^ (1 << j)
            if best[rest] == INFINITY:
                continue
            val = best[rest] + weights[i, j]
            if val < best[mask]:
                best[mask] = val
                partner[mask] = <cnp.int8_t>j
    return best_arr[size - 1], partner_arr
