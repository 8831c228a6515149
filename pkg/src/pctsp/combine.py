"""Best-of combiner, its randomized counterpart, and the closed-form constants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import Certificate, require
from .exact import MAX_EXACT_N, ExactResult, exact_pctsp
from .instance import MetricInstance, Tour
from .lp import FractionalSolution, check_feasible, solve_relaxation
from .primal_dual import (
    PrimalDualResult,
    check_dual,
    eq1_certificate,
    primal_dual_certificate,
    run_primal_dual,
    scale_penalties,
)
from .tours import SweepResult, candidate_gammas, christofides, threshold_certificate, rounding_sweep, threshold_set

REPORT_VERSION = 1
THM_TOL = 1e-6
TIE_TOL = 1e-12


class Constants(NamedTuple):
    a: float
    alpha: float
    p: float


def constants() -> Constants:
    """``a = e^(-1/3)``, ``alpha = 1 / (1 - (2/3) a)``, ``p = 1 / (3 - 2a)``."""
    a = math.exp(-1.0 / 3.0)
    return Constants(a, 1.0 / (1.0 - 2.0 * a / 3.0), 1.0 / (3.0 - 2.0 * a))


def expected_inverse_gamma() -> float:
    """Closed form of E[1/gamma] for gamma ~ U[a, 1]."""
    a = constants().a
    return 1.0 / (3.0 * (1.0 - a))


def beta_guarantee(beta: float) -> float:
    """Guarantee obtained when the TSP subroutine is within ``beta`` of its LP."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    return 1.0 / (1.0 - math.exp(1.0 - 2.0 / beta) / beta)


def mixture_bound(cost_part: float, penalty_part: float, p: float | None = None) -> float:
    """Expected-cost bound of the randomized scheme mixing PD with prob. ``p``."""
    a, _, p_star = constants()
    p = p_star if p is None else p
    return (
        (2.0 * p + (1.0 - p) / (2.0 * (1.0 - a))) * cost_part
        + (p + (1.0 - p) / (1.0 - a)) * penalty_part
    )


@dataclass
class SolveReport:
    n: int
    winner: str
    H: float
    tour: Tour
    alpha: float
    lp_value: float | None = None
    cost_part: float | None = None
    penalty_part: float | None = None
    sweep: SweepResult | None = None
    pd: PrimalDualResult | None = None
    pd_objective: float | None = None
    exact: ExactResult | None = None
    lp: FractionalSolution | None = field(default=None, repr=False)
    scaled_lp_value: float | None = None
    certificates: list = field(default_factory=list)

    @property
    def ratio(self) -> float | None:
        if self.lp_value is None:
            return None
        if self.lp_value <= 0.0:
            return 1.0
        return self.H / self.lp_value

    @property
    def certified(self) -> bool:
        return all(c.passed for c in self.certificates)

    @property
    def opt(self):
        return None if self.exact is None else self.exact.objective

    @property
    def ratio_opt(self):
        if self.exact is None:
            return None
        return 1.0 if self.exact.objective <= 0.0 else self.H / self.exact.objective

    def to_dict(self, full: bool = True):
        d = {
            "report_version": REPORT_VERSION,
            "n": self.n,
            "winner": self.winner,
            "H": self.H,
            "tour": self.tour.to_dict(),
            "lp_value": self.lp_value,
            "cost_part": self.cost_part,
            "penalty_part": self.penalty_part,
            "primal_dual_objective": self.pd_objective,
            "sweep_best_objective": None if self.sweep is None else self.sweep.best.objective,
            "ratio": self.ratio,
            "alpha": self.alpha,
            "certified": self.certified,
            "opt": self.opt,
            "ratio_opt": self.ratio_opt,
            "scaled_lp_value": self.scaled_lp_value,
            "certificates": [c.to_dict() for c in self.certificates],
        }
        if full and self.sweep is not None:
            d["sweep"] = self.sweep.to_dict()
        return d


def _exact_report(inst, alpha) -> SolveReport:
    ex = exact_pctsp(inst)
    return SolveReport(
        n=inst.n, winner="exact", H=ex.objective, tour=ex.tour, alpha=alpha, exact=ex,
        certificates=[Certificate("matches-optimum", ex.objective, ex.objective, 0.0)],
    )


def solve_best(
    inst: MetricInstance,
    *,
    exact: bool = False,
    eq1: bool = False,
    check: bool = True,
    lp_dump=None,
) -> SolveReport:
    """Best of the threshold sweep and the primal-dual tour, certified against the LP.

    ``exact`` adds the optimum from the Held-Karp oracle (n <= 18), ``eq1``
    re-solves the LP with scaled penalties for the extra primal-dual
    certificate. With ``check`` any failing certificate raises
    :class:`CertificationError`; otherwise failures are only recorded.
    """
    alpha = constants().alpha
    if inst.n <= 2:
        return _exact_report(inst, alpha)

    sol = solve_relaxation(inst, dump_path=lp_dump)
    certs = []

    def record(c):
        certs.append(c)
        if check:
            require(c)

    feas = check_feasible(inst, sol)
    record(Certificate("lp-feasible", float(len(feas.failed())), 0.0, 0.0))

    sweep = rounding_sweep(inst, sol, check=False)
    worst = min(sweep.rows, key=lambda r: r.bound - r.cost)
    record(threshold_certificate(worst))

    pd = run_primal_dual(inst, check=check)
    if not check:
        try:
            check_dual(inst, pd.record)
            dual_ok = 0.0
        except AssertionError:
            dual_ok = 1.0
        record(Certificate("moat-dual-feasible", dual_ok, 0.0, 0.0))
    record(primal_dual_certificate(inst, pd.tour, sol))

    scaled_value = None
    if eq1:
        scaled_value = solve_relaxation(inst, scale_penalties(inst).values).value
        record(eq1_certificate(inst, pd.tour, scaled_value))

    sweep_best = sweep.best.objective
    if sweep_best <= pd.tour.objective + TIE_TOL:
        winner, H, tour = "sweep", sweep_best, sweep.best.tour
    else:
        winner, H, tour = "primal-dual", pd.tour.objective, pd.tour
    record(Certificate("best-of-bound", H, alpha * sol.value, THM_TOL))

    ex = None
    if exact:
        ex = exact_pctsp(inst)
        record(Certificate("optimum-below-H", ex.objective - 1e-9, H, 0.0))
        record(Certificate("lp-below-optimum", sol.value, ex.objective, THM_TOL))

    return SolveReport(
        n=inst.n, winner=winner, H=H, tour=tour, alpha=alpha,
        lp_value=sol.value, cost_part=sol.cost_part, penalty_part=sol.penalty_part,
        sweep=sweep, pd=pd, pd_objective=pd.tour.objective, exact=ex, lp=sol,
        scaled_lp_value=scaled_value, certificates=certs,
    )


@dataclass(frozen=True, eq=False)
class RandomizedResult:
    objectives: np.ndarray
    used_pd: np.ndarray
    gammas: np.ndarray

    @property
    def trials(self):
        return len(self.objectives)

    @property
    def mean(self) -> float:
        return float(self.objectives.mean())

    @property
    def stderr(self) -> float:
        if self.trials < 2:
            return 0.0
        return float(self.objectives.std(ddof=1) / math.sqrt(self.trials))

    def to_dict(self):
        return {
            "trials": self.trials,
            "mean": self.mean,
            "stderr": self.stderr,
            "pd_trials": int(self.used_pd.sum()),
            "min": float(self.objectives.min()),
            "max": float(self.objectives.max()),
        }


def solve_randomized(
    inst: MetricInstance,
    seed,
    trials: int,
    *,
    sol: FractionalSolution | None = None,
    pd_tour: Tour | None = None,
    p: float | None = None,
) -> RandomizedResult:
    """Draw ``trials`` independent runs of the randomized scheme.

    Each trial takes the primal-dual tour with probability ``p`` (default the
    optimal mixing weight), else the Christofides tour on ``S(gamma)`` with
    ``gamma ~ U[a, 1]``. All randomness comes from ``seed``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    a, _, p_star = constants()
    p = p_star if p is None else p
    rng = np.random.default_rng(seed)
    coins = rng.random(trials) < p
    gammas = rng.uniform(a, 1.0, size=trials)
    if inst.n <= 2:
        opt = exact_pctsp(inst).objective
        return RandomizedResult(np.full(trials, opt), coins, gammas)
    if sol is None:
        sol = solve_relaxation(inst)
    if pd_tour is None and coins.any():
        pd_tour = run_primal_dual(inst).tour

    # each draw lands in one of finitely many threshold sets; tour each once
    levels = np.array(sorted(candidate_gammas(sol.y)))
    slot = np.searchsorted(levels, gammas - 1e-12, side="left")
    objs = np.empty(trials)
    cache = {}
    for k in np.unique(slot[~coins]):
        gamma = float(levels[k]) if k < len(levels) else 1.0
        members = threshold_set(sol.y, gamma).members
        if members not in cache:
            cache[members] = christofides(inst, members).objective
        objs[(slot == k) & ~coins] = cache[members]
    if coins.any():
        objs[coins] = pd_tour.objective
    return RandomizedResult(objs, coins, gammas)
