"""LP relaxation of PC-TSP solved by cutting planes.

Variables are one ``x_e`` per edge of the complete graph and one ``y_v`` per
vertex. Edges at the root may carry up to 2 so that a tour visiting a single
vertex (the root edge used twice) is feasible. The exponential cut family
``x(delta(S)) >= 2 y_v`` is separated exactly with a max-flow computation per
witness vertex. The restricted LPs go to HiGHS via :func:`scipy.optimize.linprog`.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import LPError
from .instance import MetricInstance

log = logging.getLogger(__name__)

Y_EPS = 1e-7
CUT_TOL = 1e-6
BOUND_TOL = 1e-7
DEGREE_TOL = 1e-6
DUAL_GAP_TOL = 1e-7
MAX_ROUNDS = 500


@dataclass(frozen=True)
class CutConstraint:
    subset: frozenset
    witness: int
    violation: float


@dataclass(frozen=True, eq=False)
class FractionalSolution:
    """Optimal (x, y) for the relaxation, with the objective split in two."""

    n: int
    root: int
    edges: tuple
    x: np.ndarray
    y: np.ndarray
    cost_part: float
    penalty_part: float
    value: float
    cuts: tuple = ()
    rounds: int = 0
    dual_gap: float = 0.0

    def x_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for (i, j), v in zip(self.edges, self.x):
            m[i, j] = m[j, i] = v
        return m

    def to_dict(self):
        return {
            "value": self.value,
            "cost_part": self.cost_part,
            "penalty_part": self.penalty_part,
            "y": self.y.tolist(),
            "x": {f"{i}-{j}": v for (i, j), v in zip(self.edges, self.x.tolist()) if v > 0},
            "rounds": self.rounds,
            "cuts": len(self.cuts),
        }


def edge_list(n):
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


def edge_upper(edges, root) -> np.ndarray:
    """Upper bound per edge: 2 on root edges, so the walk r-v-r is feasible."""
    return np.array([2.0 if root in e else 1.0 for e in edges])


# -- max flow ---------------------------------------------------------------


def max_flow(capacities, s: int, t: int):
    """Edmonds-Karp on a dense symmetric capacity matrix.

    Returns ``(value, source_side)`` where ``source_side`` is the set of
    vertices reachable from ``s`` in the final residual graph.
    """
    cap = np.array(capacities, dtype=float)
    n = cap.shape[0]
    residual = cap.tolist()
    eps = 1e-12
    value = 0.0
    while True:
        prev = [-1] * n
        prev[s] = s
        queue = deque([s])
        while queue and prev[t] < 0:
            u = queue.popleft()
            row = residual[u]
            for w in range(n):
                if prev[w] < 0 and row[w] > eps:
                    prev[w] = u
                    queue.append(w)
        if prev[t] < 0:
            break
        push = np.inf
        w = t
        while w != s:
            push = min(push, residual[prev[w]][w])
            w = prev[w]
        w = t
        while w != s:
            u = prev[w]
            residual[u][w] -= push
            residual[w][u] += push
            w = u
        value += push
    side = frozenset(v for v in range(n) if prev[v] >= 0)
    return value, side


# -- separation -------------------------------------------------------------


def cut_value(xm, subset) -> float:
    inside = np.zeros(xm.shape[0], dtype=bool)
    inside[list(subset)] = True
    return float(xm[np.ix_(inside, ~inside)].sum())


def separate(inst: MetricInstance, x, y, edges=None) -> list[CutConstraint]:
    """One most-violated cut per witness vertex, most violated first.

    ``x`` is either an edge vector aligned with ``edges`` or an n x n matrix.
    An empty result certifies every cut constraint.
    """
    n, r = inst.n, inst.root
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        xm = np.zeros((n, n))
        for (i, j), v in zip(edges or edge_list(n), x):
            xm[i, j] = xm[j, i] = v
    else:
        xm = x
    cuts = []
    for v in range(n):
        if v == r or y[v] <= Y_EPS:
            continue
        flow, side = max_flow(xm, r, v)
        need = 2.0 * y[v]
        if flow < need - CUT_TOL:
            subset = frozenset(range(n)) - side
            cuts.append(CutConstraint(subset, v, need - cut_value(xm, subset)))
    cuts.sort(key=lambda c: (-c.violation, c.witness))
    return cuts


# -- restricted LP ----------------------------------------------------------


class _Model:
    def __init__(self, inst, penalties):
        self.inst = inst
        self.n = n = inst.n
        self.edges = edge_list(n)
        self.m = m = len(self.edges)
        self.pen = np.asarray(penalties, dtype=float).copy()
        self.pen[inst.root] = 0.0
        self.c = np.concatenate(
            [[inst.dist[i][j] for i, j in self.edges], -self.pen]
        )
        self.const = float(self.pen.sum())
        incid = np.zeros((n, m))
        for k, (i, j) in enumerate(self.edges):
            incid[i, k] = incid[j, k] = 1.0
        self.incidence = incid
        rows = []
        for v in range(n):
            if v == inst.root:
                continue
            row = np.zeros(m + n)
            row[:m] = incid[v]
            row[m + v] = -2.0
            rows.append(row)
        self.a_eq = np.array(rows)
        self.cut_rows = []
        self.cuts = []
        lo = np.zeros(m + n)
        hi = np.ones(m + n)
        hi[:m] = edge_upper(self.edges, inst.root)
        lo[m + inst.root] = 1.0
        self.bounds = np.column_stack([lo, hi])

    def add_cut(self, cut: CutConstraint):
        inside = np.zeros(self.n, dtype=bool)
        inside[list(cut.subset)] = True
        row = np.zeros(self.m + self.n)
        for k, (i, j) in enumerate(self.edges):
            if inside[i] != inside[j]:
                row[k] = -1.0
        row[self.m + cut.witness] = 2.0
        self.cut_rows.append(row)
        self.cuts.append(cut)

    def solve(self):
        a_ub = np.array(self.cut_rows) if self.cut_rows else None
        b_ub = np.zeros(len(self.cut_rows)) if self.cut_rows else None
        res = linprog(
            self.c,
            A_ub=a_ub,
            b_ub=b_ub,
            A_eq=self.a_eq,
            b_eq=np.zeros(self.a_eq.shape[0]),
            bounds=self.bounds,
            method="highs",
        )
        return res

    def dual_objective(self, res) -> float:
        # every row has a zero right-hand side; only the bounds contribute
        lo, hi = self.bounds[:, 0], self.bounds[:, 1]
        return float(res.lower.marginals @ lo + res.upper.marginals @ hi)

    def dump(self) -> str:
        names = [f"x_{i}_{j}" for i, j in self.edges] + [f"y_{v}" for v in range(self.n)]

        def expr(row):
            terms = [f"{coef:+.6f} {names[k]}" for k, coef in enumerate(row) if coef]
            return " ".join(terms) if terms else "0"

        lines = [
            "# pctsp LP dump v1",
            f"# n={self.n} root={self.inst.root} edges={self.m} cuts={len(self.cuts)}",
            f"minimize {self.const:.6f} {expr(self.c)}",
            "equalities",
        ]
        lines += [f"  {expr(row)} = 0" for row in self.a_eq]
        lines.append("cuts")
        for row, cut in zip(self.cut_rows, self.cuts):
            lines.append(f"  {expr(row)} <= 0  # S={sorted(cut.subset)} v={cut.witness}")
        lines.append("bounds")
        for k, (lo, hi) in enumerate(self.bounds):
            lines.append(f"  {lo:.6f} <= {names[k]} <= {hi:.6f}")
        lines.append("end")
        return "\n".join(lines) + "\n"


def solve_relaxation(
    inst: MetricInstance,
    penalties=None,
    *,
    max_rounds: int = MAX_ROUNDS,
    dump_path=None,
) -> FractionalSolution:
    """Optimize the relaxation with ``penalties`` (default: the instance's own).

    Loop: solve the restricted LP, separate, add at most one cut per witness
    vertex, repeat until no cut is violated. ``dump_path`` writes the final
    row set in the plain-text format of ``_Model.dump``.
    """
    if inst.n < 3:
        raise ValueError("the relaxation needs n >= 3; solve smaller instances exactly")
    pen = inst.penalties if penalties is None else penalties
    model = _Model(inst, pen)
    m = model.m
    for rnd in range(1, max_rounds + 1):
        res = model.solve()
        if res.status != 0:
            raise LPError(
                f"restricted LP failed in round {rnd}: {res.message}",
                {"round": rnd, "cuts": len(model.cuts)},
            )
        z = np.clip(res.x, model.bounds[:, 0], model.bounds[:, 1])
        x, y = z[:m], z[m:]
        cuts = separate(inst, x, y, model.edges)
        log.debug("round %d: value %.9f, %d violated cuts", rnd, res.fun + model.const, len(cuts))
        if not cuts:
            break
        for cut in cuts[: inst.n - 1]:
            model.add_cut(cut)
    else:
        raise LPError(
            f"cutting-plane loop hit the {max_rounds}-round cap",
            {"round": max_rounds, "cuts": len(model.cuts), "last_value": res.fun + model.const},
        )
    gap = abs(res.fun - model.dual_objective(res))
    if gap > DUAL_GAP_TOL * max(1.0, abs(res.fun)):
        raise LPError(f"restricted LP duality gap {gap:.3e} too large", {"round": rnd})
    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write(model.dump())
    cost_part = float(model.c[:m] @ x)
    penalty_part = float(model.pen @ (1.0 - y))
    return FractionalSolution(
        n=inst.n,
        root=inst.root,
        edges=model.edges,
        x=x,
        y=y,
        cost_part=cost_part,
        penalty_part=penalty_part,
        value=cost_part + penalty_part,
        cuts=tuple(model.cuts),
        rounds=rnd,
        dual_gap=gap,
    )


# -- feasibility report -----------------------------------------------------


@dataclass
class FeasibilityReport:
    items: dict = field(default_factory=dict)

    def add(self, name, worst):
        self.items[name] = {"passed": worst <= 0.0, "worst_violation": max(worst, 0.0)}

    @property
    def passed(self):
        return all(item["passed"] for item in self.items.values())

    def failed(self):
        return [k for k, v in self.items.items() if not v["passed"]]


def check_feasible(inst: MetricInstance, sol: FractionalSolution, penalties=None):
    """Itemized check of every constraint class of the relaxation.

    Each entry reports the worst violation beyond its tolerance (0 if none).
    """
    rep = FeasibilityReport()
    x, y = np.asarray(sol.x), np.asarray(sol.y)
    out = np.concatenate([x - edge_upper(sol.edges, inst.root), -x, y - 1.0, -y])
    rep.add("bounds", float(out.max(initial=0.0)) - BOUND_TOL)
    rep.add("root-equality", abs(y[inst.root] - 1.0) - BOUND_TOL)
    xm = sol.x_matrix()
    deg = xm.sum(axis=1)
    dev = [abs(deg[v] - 2.0 * y[v]) for v in range(inst.n) if v != inst.root]
    rep.add("degree", max(dev, default=0.0) - DEGREE_TOL)
    worst_cut = 0.0
    for v in range(inst.n):
        if v == inst.root or y[v] <= Y_EPS:
            continue
        flow, _ = max_flow(np.clip(xm, 0.0, None), inst.root, v)
        worst_cut = max(worst_cut, 2.0 * y[v] - flow)
    rep.add("cuts", worst_cut - CUT_TOL)
    pen = inst.penalties if penalties is None else np.asarray(penalties)
    cost = sum(inst.dist[i][j] * v for (i, j), v in zip(sol.edges, x))
    pp = float(np.dot(pen, 1.0 - y)) - float(pen[inst.root] * (1.0 - y[inst.root]))
    drift = max(abs(cost - sol.cost_part), abs(pp - sol.penalty_part),
                abs(sol.value - sol.cost_part - sol.penalty_part))
    rep.add("objective", drift - 1e-9 * max(1.0, abs(sol.value)))
    return rep
