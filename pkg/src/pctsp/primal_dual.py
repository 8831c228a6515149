"""Goemans-Williamson moat growing on penalty-scaled instances.

Each non-root vertex starts as an active moat with budget ``pi'(v) / 2``.
Active moats grow their dual at unit rate until an edge between two
components goes tight (merge) or a component spends its whole budget
(deactivate). The tree of tight edges around the root is pruned, doubled,
and shortcut into a tour.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import Certificate, require
from .instance import MetricInstance, Tour, make_tour, tour_cost
from .lp import FractionalSolution

EVENT_TOL = 1e-9
DUAL_TOL = 1e-6
CERT_TOL = 1e-6


def penalty_factor(n: int) -> float:
    """``2 - 1/(n-1)``: the penalty-side factor of the primal-dual guarantee."""
    if n < 2:
        raise ValueError("penalty factor undefined for n < 2")
    return 2.0 - 1.0 / (n - 1)


@dataclass(frozen=True, eq=False)
class ScaledPenalties:
    values: np.ndarray
    factor: float


def scale_penalties(inst: MetricInstance) -> ScaledPenalties:
    factor = penalty_factor(inst.n)
    vals = np.asarray(inst.penalties, dtype=float) / factor
    vals.setflags(write=False)
    return ScaledPenalties(vals, factor)


@dataclass
class Moat:
    members: frozenset
    dual: float = 0.0
    created: float = 0.0
    deactivated_at: float | None = None

    @property
    def deactivated(self):
        return self.deactivated_at is not None


@dataclass
class MoatRecord:
    """Dual solution: laminar family of moats plus the event history."""

    moats: list = field(default_factory=list)
    budgets: np.ndarray | None = None
    events: list = field(default_factory=list)

    def deactivated_moats(self):
        return [m for m in self.moats if m.deactivated]

    @property
    def dual_total(self) -> float:
        return float(sum(m.dual for m in self.moats))

    def event_lines(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)


def moat_growing(inst: MetricInstance, scaled: ScaledPenalties, root: int | None = None):
    """Grow moats until every component is inactive.

    Returns ``(tree_edges, record)``; ``tree_edges`` are the tight edges of
    the final component that holds the root.
    """
    n = inst.n
    root = inst.root if root is None else root
    dist = np.asarray(inst.dist, dtype=float)
    budgets = np.asarray(scaled.values, dtype=float) / 2.0
    record = MoatRecord(budgets=budgets.copy())

    comp = np.arange(n)
    members = {v: [v] for v in range(n)}
    active = {v: v != root for v in range(n)}
    budget = {v: float(budgets[v]) if v != root else 0.0 for v in range(n)}
    spent = {v: 0.0 for v in range(n)}
    moat_of = {}
    for v in range(n):
        if v != root:
            moat_of[v] = len(record.moats)
            record.moats.append(Moat(frozenset([v])))
    load = np.zeros(n)
    tree = []
    now = 0.0
    iu = np.triu_indices(n, 1)

    while any(active.values()):
        act = np.array([active[comp[v]] for v in range(n)], dtype=float)
        rate = act[:, None] + act[None, :]
        slack = dist - load[:, None] - load[None, :]
        ok = (comp[:, None] != comp[None, :]) & (rate > 0)
        t_edge = np.full((n, n), np.inf)
        np.divide(slack, rate, out=t_edge, where=ok)
        t_edge = np.maximum(t_edge, 0.0)
        flat = t_edge[iu]
        edge_time = float(flat.min()) if flat.size else np.inf
        edge_pick = None
        if np.isfinite(edge_time):
            k = int(np.flatnonzero(flat <= edge_time + EVENT_TOL)[0])
            edge_pick = (int(iu[0][k]), int(iu[1][k]))

        deact_time, deact_pick = np.inf, None
        for c in sorted((c for c, a in active.items() if a), key=lambda c: min(members[c])):
            t = max(budget[c] - spent[c], 0.0)
            if t < deact_time - EVENT_TOL:
                deact_time, deact_pick = t, c

        use_edge = edge_pick is not None and edge_time <= deact_time + EVENT_TOL
        dt = edge_time if use_edge else deact_time
        for c, a in active.items():
            if a:
                spent[c] += dt
                record.moats[moat_of[c]].dual += dt
                load[members[c]] += dt
        now += dt

        if use_edge:
            i, j = edge_pick
            ci, cj = int(comp[i]), int(comp[j])
            tree.append((i, j))
            keep, gone = min(ci, cj), max(ci, cj)
            merged = members[keep] + members.pop(gone)
            members[keep] = merged
            comp[merged] = keep
            has_root = root in merged
            record.events.append({
                "time": now, "type": "merge", "edge": [i, j],
                "components": [keep, gone], "active": not has_root,
            })
            active[keep] = not has_root
            del active[gone]
            budget[keep] += budget.pop(gone)
            spent[keep] += spent.pop(gone)
            moat_of.pop(gone, None)
            if has_root:
                moat_of.pop(keep, None)
            else:
                moat_of[keep] = len(record.moats)
                record.moats.append(Moat(frozenset(merged), created=now))
        else:
            c = deact_pick
            active[c] = False
            record.moats[moat_of[c]].deactivated_at = now
            record.events.append({
                "time": now, "type": "deactivate",
                "components": [int(c)], "vertices": sorted(members[c]),
            })

    root_comp = set(members[int(comp[root])])
    tree = [(i, j) for i, j in tree if i in root_comp]
    return tree, record


def _crossing(edges, inside):
    return [e for e in edges if (e[0] in inside) != (e[1] in inside)]


def prune(tree, record: MoatRecord, root: int):
    """Drop deactivated moats hanging off the rest of the tree by a single edge.

    Repeats until no such moat remains; the root is never removed.
    """
    edges = list(tree)
    changed = True
    while changed:
        changed = False
        for moat in record.moats:
            if not moat.deactivated or root in moat.members:
                continue
            cross = _crossing(edges, moat.members)
            if len(cross) != 1:
                continue
            edges = [
                e for e in edges
                if e not in cross and not (e[0] in moat.members and e[1] in moat.members)
            ]
            changed = True
    return edges


def tree_vertices(edges, root):
    vs = {root}
    for a, b in edges:
        vs.update((a, b))
    return vs


def double_and_shortcut(inst: MetricInstance, edges) -> Tour:
    """Preorder walk of the tree from the root (lowest neighbour first)."""
    adj = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    order, stack, seen = [], [inst.root], set()
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        order.append(u)
        stack.extend(sorted(adj.get(u, ()), reverse=True))
    return make_tour(inst, order)


def check_dual(inst: MetricInstance, record: MoatRecord, tol: float = DUAL_TOL) -> dict:
    """Verify laminarity, edge packing and penalty packing of the moat duals.

    Returns the worst violation per invariant; raises ``AssertionError`` if any
    exceeds ``tol``.
    """
    sets = [m.members for m in record.moats]
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            sa, sb = sets[a], sets[b]
            if sa & sb and not (sa <= sb or sb <= sa):
                raise AssertionError(f"moats {sorted(sa)} and {sorted(sb)} cross")
    n = inst.n
    mem = np.zeros((len(sets), n))
    for k, s in enumerate(sets):
        mem[k, list(s)] = 1.0
    duals = np.array([m.dual for m in record.moats])
    if len(sets):
        crossing = (mem[:, :, None] != mem[:, None, :]).astype(float)
        load = np.tensordot(duals, crossing, axes=1)
    else:
        load = np.zeros((n, n))
    edge_excess = float((load - np.asarray(inst.dist)).max(initial=0.0))
    pen_excess, pen_gap = 0.0, 0.0
    for m in record.deactivated_moats():
        inner = sum(o.dual for o in record.moats if o.members <= m.members)
        cap = float(record.budgets[list(m.members)].sum())
        pen_excess = max(pen_excess, inner - cap)
        pen_gap = max(pen_gap, abs(inner - cap))
    worst = {"edge_packing": edge_excess, "penalty_packing": pen_excess, "deactivation_equality": pen_gap}
    for name, v in worst.items():
        if v > tol:
            raise AssertionError(f"dual invariant {name} violated by {v:.3e}")
    if any(d < -tol for d in duals):
        raise AssertionError("negative moat dual")
    return worst


@dataclass(frozen=True, eq=False)
class PrimalDualResult:
    tour: Tour
    tree: tuple
    pruned: tuple
    record: MoatRecord
    scaled: ScaledPenalties


def run_primal_dual(inst: MetricInstance, *, check: bool = True) -> PrimalDualResult:
    """Scale penalties, grow moats, prune, double. No LP needed."""
    scaled = scale_penalties(inst) if inst.n >= 2 else ScaledPenalties(np.zeros(1), 1.0)
    if inst.n == 1:
        return PrimalDualResult(make_tour(inst, [inst.root]), (), (), MoatRecord(budgets=np.zeros(1)), scaled)
    tree, record = moat_growing(inst, scaled)
    pruned = prune(tree, record, inst.root)
    tour = double_and_shortcut(inst, pruned)
    if check:
        check_dual(inst, record)
        tc = sum(inst.dist[a][b] for a, b in pruned)
        require(Certificate("doubled-tree", tour.cost, 2.0 * tc, 1e-9 * max(1.0, tc)))
    return PrimalDualResult(tour, tuple(tree), tuple(pruned), record, scaled)


def primal_dual_certificate(inst: MetricInstance, tour: Tour, lp_sol: FractionalSolution) -> Certificate:
    """``c(T) + pi(V \\ V(T)) <= 2 c(x*) + pi(1 - y*)``."""
    return Certificate(
        "primal-dual-bound",
        tour.objective,
        2.0 * lp_sol.cost_part + lp_sol.penalty_part,
        CERT_TOL,
    )


def eq1_certificate(inst: MetricInstance, tour: Tour, scaled_lp_value: float, n: int | None = None) -> Certificate:
    """Scaled-penalty guarantee ``c(T) + f pi'(V \\ V(T)) <= f LP'`` with f = 2 - 1/(n-1)."""
    n = inst.n if n is None else n
    f = penalty_factor(n)
    scaled = np.asarray(inst.penalties, dtype=float) / f
    mask = np.ones(inst.n, dtype=bool)
    mask[list(tour.vertices)] = False
    lhs = tour_cost(inst.dist, tour.vertices) + f * float(scaled[mask].sum())
    return Certificate("scaled-penalty-bound", lhs, f * scaled_lp_value, CERT_TOL)


def primal_dual_tour(inst: MetricInstance, lp_sol: FractionalSolution) -> Tour:
    """Primal-dual tour, certified against the LP optimum for the original penalties."""
    res = run_primal_dual(inst)
    require(primal_dual_certificate(inst, res.tour, lp_sol))
    return res.tour
