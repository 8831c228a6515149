"""Exact ground truth for small instances, plus brute-force test oracles."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .instance import MetricInstance, Tour, make_tour

MAX_EXACT_N = 18


@dataclass(frozen=True)
class ExactResult:
    objective: float
    visited: frozenset
    tour: Tour

    def to_dict(self):
        return {
            "objective": self.objective,
            "visited": sorted(self.visited),
            "tour": self.tour.to_dict(),
        }


def _held_karp_tables(dist, root, members):
    """Run the DP on ``members`` (root excluded); returns tables and cycle costs."""
    order = [root] + list(members)
    sub = np.ascontiguousarray(np.asarray(dist)[np.ix_(order, order)])
    dp, parent = kernels.held_karp(sub)
    k = len(members)
    cycles = np.zeros(1 << k)
    if k:
        back = sub[1:, 0]
        closed = dp + back[None, :]
        cycles = closed.min(axis=1)
        cycles[0] = 0.0
        for j in range(k):
            # a two-vertex walk uses its single edge twice
            cycles[1 << j] = 2.0 * sub[0, j + 1]
    return order, dp, parent, cycles


def _rebuild(order, dp, parent, mask, dist_back):
    if mask == 0:
        return [order[0]]
    closed = dp[mask] + dist_back
    j = int(np.argmin(closed))
    path = []
    while mask:
        path.append(order[j + 1])
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    return [order[0]] + path[::-1]


def exact_pctsp(inst: MetricInstance) -> ExactResult:
    """Optimal PC-TSP solution by Held-Karp over every subset containing the root.

    Ties between subsets go to the smallest bitmask.
    """
    if inst.n > MAX_EXACT_N:
        raise ValueError(f"exact_pctsp is capped at n={MAX_EXACT_N}, got {inst.n}")
    members = [v for v in range(inst.n) if v != inst.root]
    order, dp, parent, cycles = _held_karp_tables(inst.dist, inst.root, members)
    k = len(members)
    pen = np.asarray(inst.penalties)[members]
    inside = np.zeros(1 << k)
    for j in range(k):
        step = 1 << j
        inside.reshape(-1, 2 * step)[:, step:] += pen[j]
    totals = cycles + (inst.total_penalty - inside)
    best = float(totals.min())
    mask = int(np.flatnonzero(totals <= best + 1e-12)[0])
    back = np.asarray(inst.dist)[members, inst.root] if k else np.zeros(0)
    verts = _rebuild(order, dp, parent, mask, back)
    tour = make_tour(inst, verts)
    return ExactResult(tour.objective, frozenset(verts), tour)


def exact_tsp(inst: MetricInstance, subset) -> float:
    """Minimum closed-walk cost through exactly ``subset`` (must hold the root)."""
    s = set(int(v) for v in subset)
    if inst.root not in s:
        raise ValueError("subset must contain the root")
    if len(s) > MAX_EXACT_N:
        raise ValueError(f"exact_tsp is capped at {MAX_EXACT_N} vertices")
    members = sorted(s - {inst.root})
    if len(members) <= 1:
        return 2.0 * float(inst.dist[inst.root][members[0]]) if members else 0.0
    _, _, _, cycles = _held_karp_tables(inst.dist, inst.root, members)
    return float(cycles[-1])


def brute_tsp(dist, subset, root) -> float:
    """Enumerate all orders; for cross-checking :func:`exact_tsp`."""
    rest = sorted(set(subset) - {root})
    if len(rest) <= 1:
        return 2.0 * float(dist[root][rest[0]]) if rest else 0.0
    best = np.inf
    for perm in itertools.permutations(rest):
        seq = (root,) + perm
        c = sum(dist[a][b] for a, b in zip(seq, seq[1:])) + dist[seq[-1]][root]
        best = min(best, c)
    return float(best)


def brute_pctsp(inst: MetricInstance) -> float:
    """All subsets times all orders. Only sensible for n <= 7."""
    others = [v for v in range(inst.n) if v != inst.root]
    best = inst.total_penalty
    for r in range(1, len(others) + 1):
        for sub in itertools.combinations(others, r):
            c = brute_tsp(inst.dist, (inst.root,) + sub, inst.root)
            best = min(best, c + inst.penalty_outside((inst.root,) + sub))
    return best


def brute_matching(weights) -> float:
    """Minimum perfect matching value by enumerating every pairing (k <= 10)."""
    w = np.asarray(weights, dtype=float)
    k = w.shape[0]
    if k % 2:
        raise ValueError("odd vertex count has no perfect matching")
    if k > 10:
        raise ValueError("brute_matching is capped at k=10")

    def rec(left):
        if not left:
            return 0.0
        i, rest = left[0], left[1:]
        return min(
            w[i, j] + rec(rest[:t] + rest[t + 1 :]) for t, j in enumerate(rest)
        )

    return float(rec(tuple(range(k))))


def brute_min_cut(capacities, s: int, t: int):
    """Exact min s-t cut over all 2^(n-2) side assignments.

    Returns ``(value, source_side)``; ties go to the first assignment found.
    """
    cap = np.asarray(capacities, dtype=float)
    n = cap.shape[0]
    if n > 16:
        raise ValueError("brute_min_cut is capped at n=16")
    free = [v for v in range(n) if v not in (s, t)]
    best, best_side = np.inf, None
    for bits in range(1 << len(free)):
        side = np.zeros(n, dtype=bool)
        side[s] = True
        for idx, v in enumerate(free):
            if bits >> idx & 1:
                side[v] = True
        value = float(cap[np.ix_(side, ~side)].sum())
        if value < best:
            best, best_side = value, frozenset(np.flatnonzero(side).tolist())
    return best, best_side
