import importlib.metadata

from .allocate import RoundingParams, fastest_allocation, optimal_b, round_half, round_hlpb
from .bounds import (
    BoundsReport,
    bounds_report,
    exact_makespan,
    load_and_cp,
    theoretical_ratio,
)
from .exceptions import HybridSchedError
from .formats import load_instance, load_schedule
from .graph import topological_order
from .lp import FractionalSolution, build_allocation_lp, solve_relaxation
from .models import (
    INCOMPATIBLE,
    Allocation,
    Instance,
    Schedule,
    Side,
    Task,
    ValidationReport,
)
from .schedule import Diagnostics, hlp_b, list_schedule, run_pipeline
from .simplex import LpProblem, simplex_solve
from .validate import validate_schedule

try:
    __version__ = importlib.metadata.version("hybrid-sched")
except importlib.metadata.PackageNotFoundError:
    __version__ = "dev"
