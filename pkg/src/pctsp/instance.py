"""Instance model: validation, metric repair, generation, JSON I/O, objective."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InstanceError

REL_TOL = 1e-9


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """Complete metric graph with a depot (``root``) and vertex penalties.

    Build through :func:`validate`; the constructor does no checking.
    """

    n: int
    root: int
    dist: np.ndarray
    penalties: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, MetricInstance):
            return NotImplemented
        return (
            self.n == other.n
            and self.root == other.root
            and np.array_equal(self.dist, other.dist)
            and np.array_equal(self.penalties, other.penalties)
        )

    __hash__ = None

    @property
    def total_penalty(self) -> float:
        return float(self.penalties.sum())

    def penalty_outside(self, visited) -> float:
        mask = np.ones(self.n, dtype=bool)
        mask[list(visited)] = False
        return float(self.penalties[mask].sum())

    def with_penalties(self, penalties) -> MetricInstance:
        p = np.array(penalties, dtype=float)
        p[self.root] = 0.0
        return MetricInstance(self.n, self.root, self.dist, _frozen(p))


@dataclass(frozen=True)
class Tour:
    """Closed walk from the root through distinct vertices."""

    vertices: tuple
    cost: float
    objective: float

    @property
    def visited(self) -> frozenset:
        return frozenset(self.vertices)

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "cost": self.cost,
            "objective": self.objective,
        }


def validate(n: int, root: int, matrix, penalties) -> MetricInstance:
    """Check the metric axioms and return an immutable instance.

    The root penalty is forced to zero. Raises :class:`InstanceError` on any
    violation.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InstanceError(f"n must be a positive integer, got {n!r}")
    if not isinstance(root, (int, np.integer)) or not 0 <= root < n:
        raise InstanceError(f"root {root!r} out of range for n={n}")
    try:
        d = np.array(matrix, dtype=float)
        p = np.array(penalties, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"non-numeric instance data: {exc}") from None
    if d.shape != (n, n):
        raise InstanceError(f"metric must be {n}x{n}, got shape {d.shape}")
    if p.shape != (n,):
        raise InstanceError(f"penalties must have length {n}, got shape {p.shape}")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(p))):
        raise InstanceError("non-finite entries")
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise InstanceError(f"negative distance dist[{i}][{j}]={d[i, j]}")
    if np.any(p < 0):
        v = int(np.argmax(p < 0))
        raise InstanceError(f"negative penalty at vertex {v}: {p[v]}")
    eps = REL_TOL * max(float(d.max(initial=0.0)), 1.0)
    if np.any(np.abs(np.diag(d)) > eps):
        raise InstanceError("nonzero diagonal")
    if np.any(np.abs(d - d.T) > eps):
        i, j = np.argwhere(np.abs(d - d.T) > eps)[0]
        raise InstanceError(
            f"asymmetric: dist[{i}][{j}]={d[i, j]} != dist[{j}][{i}]={d[j, i]}"
        )
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        via = d[:, k, None] + d[None, k, :]
        bad = via < d - eps
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise InstanceError(
                f"triangle inequality violated: dist[{i}][{j}]={d[i, j]} > "
                f"dist[{i}][{k}] + dist[{k}][{j}]={via[i, j]}"
            )
    p[root] = 0.0
    return MetricInstance(int(n), int(root), _frozen(d), _frozen(p))


def metric_closure(matrix) -> np.ndarray:
    """All-pairs shortest paths (Floyd-Warshall); identity on metrics."""
    d = np.array(matrix, dtype=float)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def gen_euclidean(n: int, seed, penalty_scale: float = 1.0) -> MetricInstance:
    """Random points in the unit square, root at vertex 0.

    Distances are Euclidean rounded to 6 decimals, then closed under shortest
    paths in integer micro-units so rounding cannot break the triangle
    inequality. Penalties are uniform on ``[0, penalty_scale]``, also rounded.
    """
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    pen = rng.uniform(0.0, penalty_scale, size=n)
    diff = pts[:, None, :] - pts[None, :, :]
    micro = np.rint(np.sqrt((diff**2).sum(axis=2)) * 1e6).astype(np.int64)
    for k in range(n):
        np.minimum(micro, micro[:, k, None] + micro[None, k, :], out=micro)
    dist = micro / 1e6
    pen = np.rint(pen * 1e6) / 1e6
    return validate(n, 0, dist, pen)


def tour_cost(dist, vertices: Sequence[int]) -> float:
    """Closed-walk cost; a 2-vertex walk traverses its edge twice."""
    if len(vertices) <= 1:
        return 0.0
    total = 0.0
    for a, b in zip(vertices, vertices[1:]):
        total += dist[a][b]
    return float(total + dist[vertices[-1]][vertices[0]])


def make_tour(inst: MetricInstance, vertices: Sequence[int]) -> Tour:
    vs = tuple(int(v) for v in vertices)
    if not vs or vs[0] != inst.root:
        raise ValueError(f"tour must start at root {inst.root}: {vs}")
    if len(set(vs)) != len(vs):
        raise ValueError(f"tour repeats a vertex: {vs}")
    if any(not 0 <= v < inst.n for v in vs):
        raise ValueError(f"tour has out-of-range vertex: {vs}")
    cost = tour_cost(inst.dist, vs)
    return Tour(vs, cost, cost + inst.penalty_outside(vs))


def objective(inst: MetricInstance, tour) -> float:
    """``c(T) + pi(V \\ V(T))`` for a :class:`Tour` or a vertex sequence.

    The sequence may start anywhere but must contain the root.
    """
    vs = tuple(tour.vertices) if isinstance(tour, Tour) else tuple(tour)
    if inst.root not in vs:
        raise ValueError("tour does not contain the root")
    return tour_cost(inst.dist, vs) + inst.penalty_outside(vs)


# -- JSON -------------------------------------------------------------------


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def dumps(inst: MetricInstance) -> str:
    """Serialize with 6-decimal fixed notation, one matrix row per line."""
    rows = ",\n    ".join(
        "[" + ", ".join(_fmt(v) for v in row) + "]" for row in inst.dist
    )
    pens = ", ".join(_fmt(v) for v in inst.penalties)
    return (
        "{\n"
        f'  "n": {inst.n},\n'
        f'  "root": {inst.root},\n'
        f'  "metric": [\n    {rows}\n  ],\n'
        f'  "penalties": [{pens}]\n'
        "}\n"
    )


def loads(text: str) -> MetricInstance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InstanceError("instance JSON must be an object")
    missing = {"n", "root", "metric", "penalties"} - raw.keys()
    if missing:
        raise InstanceError(f"missing keys: {sorted(missing)}")
    return validate(raw["n"], raw["root"], raw["metric"], raw["penalties"])


def load(path) -> MetricInstance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None
    return loads(text)


def save(inst: MetricInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(inst))
