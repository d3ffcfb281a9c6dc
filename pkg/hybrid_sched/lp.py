import logging
from typing import List, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import LpLimits
from .exceptions import (
    CapacityExceededError,
    LpInfeasibleError,
    LpRequiresFiniteTimesError,
    LpUnboundedError,
)
from .graph import longest_path
from .models import Instance
from .simplex import (
    FEASIBILITY_TOLERANCE,
    LpProblem,
    LpStatus,
    Relation,
    simplex_solve,
)

logger = logging.getLogger(__name__)


class FractionalSolution(BaseModel):
    """
    Optimal solution of the relaxed allocation program: x[j] is the CPU share of
    task j, completion[j] its completion variable C_j and objective is C^R_max, a
    lower bound on the optimal makespan.
    """

    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    completion: Tuple[float, ...]
    objective: float = Field(ge=0)

    @model_validator(mode="after")
    def _shape_and_range(self) -> "FractionalSolution":
        if len(self.x) != len(self.completion):
            raise ValueError("x and completion must have one entry per task")
        if any(not 0.0 <= value <= 1.0 for value in self.x):
            raise ValueError("x values must lie in [0, 1]")
        return self


class LoadProfile(NamedTuple):
    w_cpu: float
    w_gpu: float
    critical_path: float


def _finite_times(instance: Instance) -> Tuple[List[float], List[float]]:
    if not instance.all_finite:
        raise LpRequiresFiniteTimesError("LP requires finite times")
    return list(instance.cpu_time), list(instance.gpu_time)  # type: ignore[arg-type]


def build_allocation_lp(instance: Instance) -> LpProblem:
    """
    Variables are x_0..x_{n-1}, C_0..C_{n-1}, C_max.  Rows, in order:

    * `load_cpu`:  sum p̄_j x_j - m C_max <= 0
    * `load_gpu`:  sum p_j (1 - x_j) - k C_max <= 0
    * `source_j`:  (p̄_j - p_j) x_j - C_j <= -p_j for every task without predecessor
      (the fictive zero-length task 0 with C_0 = 0 precedes it)
    * `path_i_j`:  C_i + (p̄_j - p_j) x_j - C_j <= -p_j for every edge (i, j)
    * `cmax_j`:    C_j - C_max <= 0
    """
    cpu, gpu = _finite_times(instance)
    n = instance.task_count
    width = 2 * n + 1
    cmax = 2 * n

    rows: List[np.ndarray] = []
    rhs: List[float] = []
    names: List[str] = []

    def add(name: str, coefficients: np.ndarray, bound: float) -> None:
        rows.append(coefficients)
        rhs.append(bound)
        names.append(name)

    row = np.zeros(width)
    row[:n] = cpu
    row[cmax] = -instance.m
    add("load_cpu", row, 0.0)

    row = np.zeros(width)
    row[:n] = [-p for p in gpu]
    row[cmax] = -instance.k
    add("load_gpu", row, -float(sum(gpu)))

    preds = instance.predecessors()
    for task in range(n):
        if preds[task]:
            continue
        row = np.zeros(width)
        row[task] = cpu[task] - gpu[task]
        row[n + task] = -1.0
        add(f"source_{task}", row, -gpu[task])

    for source, target in instance.edges:
        row = np.zeros(width)
        row[n + source] = 1.0
        row[target] = cpu[target] - gpu[target]
        row[n + target] = -1.0
        add(f"path_{source}_{target}", row, -gpu[target])

    for task in range(n):
        row = np.zeros(width)
        row[n + task] = 1.0
        row[cmax] = -1.0
        add(f"cmax_{task}", row, 0.0)

    upper = np.full(width, np.inf)
    upper[:n] = 1.0

    return LpProblem(
        objective=np.eye(1, width, cmax).ravel(),
        matrix=np.vstack(rows),
        relations=(Relation.LE,) * len(rows),
        rhs=np.asarray(rhs),
        lower=np.zeros(width),
        upper=upper,
        variable_names=tuple(
            [f"x{j}" for j in range(n)] + [f"C{j}" for j in range(n)] + ["Cmax"]
        ),
        constraint_names=tuple(names),
    )


def solve_relaxation(
    instance: Instance, limits: LpLimits = LpLimits()
) -> FractionalSolution:
    if instance.task_count > limits.max_tasks:
        raise CapacityExceededError(
            f"LP path refuses {instance.task_count} tasks; "
            f"raise the LP task cap to at least {instance.task_count}"
        )

    problem = build_allocation_lp(instance)
    logger.info(
        "allocation LP: %d variables, %d rows", problem.width, len(problem.relations)
    )

    status, values, objective = simplex_solve(problem)
    if status is LpStatus.INFEASIBLE:
        raise LpInfeasibleError("allocation LP reported infeasible")
    if status is LpStatus.UNBOUNDED:
        raise LpUnboundedError("allocation LP reported unbounded")

    n = instance.task_count
    solution = FractionalSolution(
        x=tuple(min(max(v, 0.0), 1.0) for v in values[:n]),
        completion=tuple(max(v, 0.0) for v in values[n : 2 * n]),
        objective=max(values[2 * n], 0.0),
    )
    logger.info("allocation LP: C^R_max = %r", solution.objective)
    return solution


def check_relaxation(
    instance: Instance,
    fractional: FractionalSolution,
    tolerance: float = FEASIBILITY_TOLERANCE,
) -> List[str]:
    """
    Names of relaxed constraints the solution violates, re-evaluated from the
    instance directly rather than from the solver's tableau.
    """
    cpu, gpu = _finite_times(instance)
    x, completion, cmax = fractional.x, fractional.completion, fractional.objective
    violated = []

    def duration(task: int) -> float:
        return cpu[task] * x[task] + gpu[task] * (1.0 - x[task])

    if sum(p * xj for p, xj in zip(cpu, x)) / instance.m > cmax + tolerance:
        violated.append("load_cpu")
    if sum(p * (1.0 - xj) for p, xj in zip(gpu, x)) / instance.k > cmax + tolerance:
        violated.append("load_gpu")

    preds = instance.predecessors()
    for task in range(instance.task_count):
        if not preds[task] and duration(task) > completion[task] + tolerance:
            violated.append(f"source_{task}")
    for source, target in instance.edges:
        if completion[source] + duration(target) > completion[target] + tolerance:
            violated.append(f"path_{source}_{target}")
    for task in range(instance.task_count):
        if not -tolerance <= completion[task] <= cmax + tolerance:
            violated.append(f"cmax_{task}")

    return violated


def relaxed_loads(instance: Instance, fractional: FractionalSolution) -> LoadProfile:
    """W^R_CPU, W^R_GPU and CP^R of a fractional allocation."""
    cpu, gpu = _finite_times(instance)
    x = fractional.x
    weights = [cpu[j] * x[j] + gpu[j] * (1.0 - x[j]) for j in range(instance.task_count)]
    return LoadProfile(
        w_cpu=sum(cpu[j] * x[j] for j in range(instance.task_count)),
        w_gpu=sum(gpu[j] * (1.0 - x[j]) for j in range(instance.task_count)),
        critical_path=longest_path(instance, weights),
    )
