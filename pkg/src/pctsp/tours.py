"""Threshold rounding of the LP solution with Christofides on each threshold set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import Certificate, require
from .instance import MetricInstance, Tour, make_tour
from .lp import FractionalSolution

THRESHOLD_TOL = 1e-12
Y_EPS = 1e-7
ROW_TOL = 1e-6


@dataclass(frozen=True)
class ThresholdSet:
    gamma: float
    members: frozenset


def threshold_set(y, gamma: float) -> ThresholdSet:
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    members = frozenset(int(v) for v in np.flatnonzero(np.asarray(y) >= gamma - THRESHOLD_TOL))
    return ThresholdSet(float(gamma), members)


def min_weight_perfect_matching(weights) -> list[tuple[int, int]]:
    """Exact minimum-weight perfect matching via subset DP, O(2^k k^2)."""
    w = np.ascontiguousarray(weights, dtype=float)
    k = w.shape[0]
    if k % 2:
        raise ValueError(f"perfect matching needs an even vertex count, got {k}")
    if k == 0:
        return []
    _, partner = kernels.matching_dp(w)
    pairs = []
    mask = (1 << k) - 1
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = int(partner[mask])
        pairs.append((i, j))
        mask ^= (1 << i) | (1 << j)
    return pairs


def minimum_spanning_tree(dist) -> list[tuple[int, int]]:
    """Prim's algorithm on a dense matrix; ties go to the lowest index."""
    d = np.asarray(dist, dtype=float)
    k = d.shape[0]
    in_tree = np.zeros(k, dtype=bool)
    in_tree[0] = True
    best = d[0].copy()
    link = np.zeros(k, dtype=int)
    edges = []
    for _ in range(k - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        edges.append((min(link[v], v), max(link[v], v)))
        in_tree[v] = True
        closer = d[v] < best
        best = np.where(closer, d[v], best)
        link = np.where(closer, v, link)
    return edges


def euler_circuit(k: int, edges, start: int = 0) -> list[int]:
    """Hierholzer on a connected multigraph with all degrees even."""
    adj = [[] for _ in range(k)]
    for idx, (a, b) in enumerate(edges):
        adj[a].append((b, idx))
        adj[b].append((a, idx))
    for lst in adj:
        # popped from the end, so the lowest neighbour comes off first
        lst.sort(reverse=True)
    used = [False] * len(edges)
    stack, circuit = [start], []
    while stack:
        u = stack[-1]
        lst = adj[u]
        while lst and used[lst[-1][1]]:
            lst.pop()
        if lst:
            w, idx = lst.pop()
            used[idx] = True
            stack.append(w)
        else:
            circuit.append(stack.pop())
    return circuit[::-1]


def shortcut(walk) -> list[int]:
    seen, order = set(), []
    for v in walk:
        if v not in seen:
            seen.add(v)
            order.append(v)
    return order


def christofides(inst: MetricInstance, subset) -> Tour:
    """Christofides' heuristic restricted to ``subset`` (must contain the root)."""
    members = sorted(set(int(v) for v in subset))
    if inst.root not in members:
        raise ValueError("subset must contain the root")
    members.remove(inst.root)
    order = [inst.root] + members
    if len(order) <= 2:
        return make_tour(inst, order)
    sub = np.asarray(inst.dist)[np.ix_(order, order)]
    tree = minimum_spanning_tree(sub)
    deg = np.zeros(len(order), dtype=int)
    for a, b in tree:
        deg[a] += 1
        deg[b] += 1
    odd = np.flatnonzero(deg % 2).tolist()
    pairs = min_weight_perfect_matching(sub[np.ix_(odd, odd)])
    multigraph = tree + [(odd[i], odd[j]) for i, j in pairs]
    walk = euler_circuit(len(order), multigraph, start=0)
    return make_tour(inst, [order[v] for v in shortcut(walk)])


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    size: int
    tour: Tour
    bound: float

    @property
    def cost(self):
        return self.tour.cost

    @property
    def objective(self):
        return self.tour.objective

    @property
    def bound_ok(self):
        return self.tour.cost <= self.bound + ROW_TOL

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "size": self.size,
            "cost": self.cost,
            "objective": self.objective,
            "bound": self.bound,
            "bound_ok": self.bound_ok,
            "vertices": list(self.tour.vertices),
        }


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    best_index: int

    @property
    def best(self) -> SweepRow:
        return self.rows[self.best_index]

    def to_dict(self):
        return {
            "best_index": self.best_index,
            "best_objective": self.best.objective,
            "rows": [r.to_dict() for r in self.rows],
        }


def candidate_gammas(y) -> list[float]:
    """Distinct LP vertex values above ``Y_EPS``, descending.

    Values within 1e-12 of each other collapse onto the smallest one.
    """
    vals = sorted((min(float(v), 1.0) for v in y if v > Y_EPS), reverse=True)
    out = []
    for v in vals:
        if out and out[-1] - v <= THRESHOLD_TOL:
            out[-1] = v
        else:
            out.append(v)
    return out


def rounding_sweep(inst: MetricInstance, sol: FractionalSolution, check: bool = True) -> SweepResult:
    """Christofides on ``S(gamma)`` for every candidate gamma; keep the best.

    Each row carries the bound ``3 c(x*) / (2 gamma)``; with ``check`` a row
    that exceeds it raises :class:`CertificationError`. Objective ties go to
    the smaller gamma.
    """
    rows, seen = [], {}
    for gamma in candidate_gammas(sol.y):
        ts = threshold_set(sol.y, gamma)
        tour = seen.get(ts.members)
        if tour is None:
            tour = seen[ts.members] = christofides(inst, ts.members)
        row = SweepRow(gamma, len(ts.members), tour, 1.5 * sol.cost_part / gamma)
        if check:
            require(threshold_certificate(row))
        rows.append(row)
    best = 0
    for idx, row in enumerate(rows):
        cur = rows[best]
        if row.objective < cur.objective or (
            row.objective == cur.objective and row.gamma < cur.gamma
        ):
            best = idx
    return SweepResult(tuple(rows), best)


def threshold_certificate(row: SweepRow) -> Certificate:
    return Certificate(f"threshold-tour-bound[gamma={row.gamma:.9g}]", row.cost, row.bound, ROW_TOL)
