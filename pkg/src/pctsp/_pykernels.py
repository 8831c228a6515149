"""Pure-Python versions of the compiled kernels.

Same algorithms, same tie-breaking, same return layout as ``_kernels.pyx``.
"""
import math

import numpy as np


def held_karp(dist):
    dist = np.asarray(dist, dtype=float)
    k = dist.shape[0] - 1
    size = 1 << k
    dp = np.full((size, max(k, 1)), np.inf)
    parent = np.full((size, max(k, 1)), -1, dtype=np.int8)
    if k == 0:
        return dp, parent
    d = dist.tolist()
    rows = [[math.inf] * k for _ in range(size)]
    par = [[-1] * k for _ in range(size)]
    for j in range(k):
        rows[1 << j][j] = d[0][j + 1]
    for mask in range(1, size):
        row = rows[mask]
        for j in range(k):
            if not (mask >> j) & 1:
                continue
            base = row[j]
            if base == math.inf:
                continue
            dj = d[j + 1]
            for nxt in range(k):
                if (mask >> nxt) & 1:
                    continue
                nmask = mask | (1 << nxt)
                val = base + dj[nxt + 1]
                if val < rows[nmask][nxt]:
                    rows[nmask][nxt] = val
                    par[nmask][nxt] = j
    dp[:, :] = rows
    parent[:, :] = par
    return dp, parent


def matching_dp(weights):
    w = np.asarray(weights, dtype=float).tolist()
    k = len(w)
    size = 1 << k
    best = [math.inf] * size
    partner = [-1] * size
    best[0] = 0.0
    for mask in range(1, size):
        i = (mask & -mask).bit_length() - 1
        wi = w[i]
        cur = math.inf
        for j in range(i + 1, k):
            if not (mask >> j) & 1:
                continue
            rest = best[mask ^ (1 << i) ^ (1 << j)]
            if rest == math.inf:
                continue
            val = rest + wi[j]
            if val < cur:
                cur = val
                partner[mask] = j
        best[mask] = cur
    return best[size - 1], np.array(partner, dtype=np.int8)
