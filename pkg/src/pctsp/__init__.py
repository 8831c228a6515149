"""Prize-collecting TSP: LP threshold rounding combined with primal-dual moat growing."""
from .combine import (
    SolveReport,
    beta_guarantee,
    constants,
    solve_best,
    solve_randomized,
)
from .errors import Certificate, CertificationError, InstanceError, LPError
from .exact import exact_pctsp, exact_tsp
from .instance import MetricInstance, Tour, gen_euclidean, metric_closure, objective, validate
from .kernels import BACKEND
from .lp import FractionalSolution, solve_relaxation
from .primal_dual import primal_dual_tour, run_primal_dual
from .tours import christofides, rounding_sweep

__version__ = "0.1.0"
