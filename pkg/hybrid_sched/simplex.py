"""
Dense two-phase tableau simplex with Bland's pivoting rule.

The solver is generic: `LpProblem` is "minimize c.x subject to rows and variable
bounds" with lower bounds >= 0.  Lower bounds are shifted away, finite upper bounds
become extra `<=` rows, rows with a negative right-hand side are negated, and then
phase 1 minimises the sum of artificial variables before phase 2 optimises the
real objective.  Bland's rule (lowest entering index, lowest leaving basic index
among ratio ties) guarantees termination on degenerate problems.
"""
import logging
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import LpError

logger = logging.getLogger(__name__)

PIVOT_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-7
MAX_ITERATIONS = 200_000


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="

    @property
    def flipped(self) -> "Relation":
        if self is Relation.LE:
            return Relation.GE
        if self is Relation.GE:
            return Relation.LE
        return self


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpProblem(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    objective: np.ndarray = Field(description="Cost vector, minimised.")
    matrix: np.ndarray = Field(description="One row of coefficients per constraint.")
    relations: Tuple[Relation, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray = Field(description="Upper bounds; `inf` when unbounded above.")
    variable_names: Tuple[str, ...] = ()
    constraint_names: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _consistent_shapes(self) -> "LpProblem":
        width = self.objective.shape[0]
        rows = len(self.relations)

        if self.matrix.shape != (rows, width):
            raise ValueError(
                f"constraint matrix has shape {self.matrix.shape}, expected {(rows, width)}"
            )
        if self.rhs.shape != (rows,):
            raise ValueError("one right-hand side per constraint is required")
        if self.lower.shape != (width,) or self.upper.shape != (width,):
            raise ValueError("one lower and one upper bound per variable is required")
        if np.any(self.lower < 0):
            raise ValueError("lower bounds must be non-negative")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")
        if self.variable_names and len(self.variable_names) != width:
            raise ValueError("one name per variable is required")
        if self.constraint_names and len(self.constraint_names) != rows:
            raise ValueError("one name per constraint is required")

        return self

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        rows: Sequence[Tuple[Sequence[float], Relation, float]],
        bounds: Optional[Sequence[Tuple[float, float]]] = None,
    ) -> "LpProblem":
        """
        Convenience constructor from plain Python lists.

        >>> problem = LpProblem.from_rows([1.0], [([1.0], Relation.GE, 3.0)])
        >>> status, values, objective = simplex_solve(problem)
        >>> status.value, values, objective
        ('optimal', (3.0,), 3.0)
        """
        width = len(objective)
        if bounds is None:
            bounds = [(0.0, np.inf)] * width

        return cls(
            objective=np.asarray(objective, dtype=float),
            matrix=np.asarray([row for row, _, _ in rows], dtype=float).reshape(
                len(rows), width
            ),
            relations=tuple(relation for _, relation, _ in rows),
            rhs=np.asarray([rhs for _, _, rhs in rows], dtype=float),
            lower=np.asarray([lo for lo, _ in bounds], dtype=float),
            upper=np.asarray([hi for _, hi in bounds], dtype=float),
        )

    @property
    def width(self) -> int:
        return int(self.objective.shape[0])

    def residuals(self, values: np.ndarray) -> np.ndarray:
        """Per row violation amount (0 when satisfied) of a candidate point."""
        activity = self.matrix @ values
        violation = np.zeros(len(self.relations))
        for row, relation in enumerate(self.relations):
            gap = activity[row] - self.rhs[row]
            if relation is Relation.LE:
                violation[row] = max(gap, 0.0)
            elif relation is Relation.GE:
                violation[row] = max(-gap, 0.0)
            else:
                violation[row] = abs(gap)
        return violation


class LpResult(NamedTuple):
    status: LpStatus
    values: Tuple[float, ...] = ()
    objective: Optional[float] = None


class _Tableau:
    """
    Rows 0..r-1 are constraints, row r is the reduced-cost row; the last column is
    the right-hand side (and minus the objective value in the cost row).
    """

    def __init__(self, table: np.ndarray, basis: List[int], pivot_tol: float) -> None:
        self.table = table
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.iterations = 0

    @property
    def rows(self) -> int:
        return self.table.shape[0] - 1

    def set_costs(self, costs: np.ndarray) -> None:
        """Install a cost vector and price out the current basis."""
        self.table[-1, :] = 0.0
        self.table[-1, : costs.shape[0]] = costs
        for row, column in enumerate(self.basis):
            if costs[column] != 0.0:
                self.table[-1, :] -= costs[column] * self.table[row, :]

    def pivot(self, row: int, column: int) -> None:
        table = self.table
        table[row, :] /= table[row, column]
        factors = table[:, column].copy()
        factors[row] = 0.0
        table -= np.outer(factors, table[row, :])
        table[:, column] = 0.0
        table[row, column] = 1.0

        rhs = table[:-1, -1]
        rhs[np.abs(rhs) < self.pivot_tol * 1e-3] = 0.0

        self.basis[row] = column
        self.iterations += 1

    def optimise(self, allowed_columns: int, max_iterations: int) -> LpStatus:
        table = self.table
        while True:
            if self.iterations >= max_iterations:
                raise LpError(f"simplex iteration limit {max_iterations} reached")

            entering = np.flatnonzero(table[-1, :allowed_columns] < -self.pivot_tol)
            if entering.size == 0:
                return LpStatus.OPTIMAL
            column = int(entering[0])

            candidates = np.flatnonzero(table[:-1, column] > self.pivot_tol)
            if candidates.size == 0:
                return LpStatus.UNBOUNDED

            ratios = table[candidates, -1] / table[candidates, column]
            best = ratios.min()
            tied = candidates[ratios <= best + self.pivot_tol]
            row = int(min(tied, key=lambda r: self.basis[r]))

            self.pivot(row, column)


def simplex_solve(
    problem: LpProblem,
    pivot_tol: float = PIVOT_TOLERANCE,
    feasibility_tol: float = FEASIBILITY_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
) -> LpResult:
    """
    Solve `problem`; the result unpacks as `(status, values, objective)`.

    Identical problems produce bit-identical results: there is no randomisation and
    every tie is broken by index.
    """
    width = problem.width
    lower = problem.lower.astype(float)
    upper = problem.upper.astype(float)

    # x = lower + y with y >= 0
    rhs = problem.rhs.astype(float) - problem.matrix @ lower
    bounded = np.flatnonzero(np.isfinite(upper))
    bound_rows = np.zeros((bounded.shape[0], width))
    bound_rows[np.arange(bounded.shape[0]), bounded] = 1.0

    matrix = np.vstack([problem.matrix.astype(float), bound_rows])
    rhs = np.concatenate([rhs, upper[bounded] - lower[bounded]])
    relations = list(problem.relations) + [Relation.LE] * bounded.shape[0]

    for row in np.flatnonzero(rhs < 0):
        matrix[row, :] *= -1.0
        rhs[row] *= -1.0
        relations[row] = relations[row].flipped

    rows = matrix.shape[0]
    inequality_rows = [r for r, rel in enumerate(relations) if rel is not Relation.EQ]
    artificial_rows = [r for r, rel in enumerate(relations) if rel is not Relation.LE]

    slack_start = width
    artificial_start = slack_start + len(inequality_rows)
    columns = artificial_start + len(artificial_rows)

    table = np.zeros((rows + 1, columns + 1))
    table[:rows, :width] = matrix
    table[:rows, -1] = rhs

    basis = [-1] * rows
    for offset, row in enumerate(inequality_rows):
        sign = 1.0 if relations[row] is Relation.LE else -1.0
        table[row, slack_start + offset] = sign
        if sign > 0:
            basis[row] = slack_start + offset
    for offset, row in enumerate(artificial_rows):
        table[row, artificial_start + offset] = 1.0
        basis[row] = artificial_start + offset

    tableau = _Tableau(table, basis, pivot_tol)
    logger.debug(
        "simplex: %d rows, %d structural, %d slack, %d artificial columns",
        rows,
        width,
        len(inequality_rows),
        len(artificial_rows),
    )

    if artificial_rows:
        phase_one_costs = np.zeros(columns)
        phase_one_costs[artificial_start:] = 1.0
        tableau.set_costs(phase_one_costs)
        tableau.optimise(columns, max_iterations)

        infeasibility = -tableau.table[-1, -1]
        if infeasibility > feasibility_tol:
            logger.debug("simplex: phase 1 ended at %g, infeasible", infeasibility)
            return LpResult(status=LpStatus.INFEASIBLE)

        _drive_out_artificials(tableau, artificial_start)
        tableau.table = np.delete(
            tableau.table, np.s_[artificial_start:columns], axis=1
        )
        columns = artificial_start

    phase_two_costs = np.zeros(columns)
    phase_two_costs[:width] = problem.objective
    tableau.set_costs(phase_two_costs)
    status = tableau.optimise(columns, max_iterations)
    if status is LpStatus.UNBOUNDED:
        return LpResult(status=status)

    shifted = np.zeros(columns)
    for row, column in enumerate(tableau.basis):
        shifted[column] = tableau.table[row, -1]
    values = lower + np.maximum(shifted[:width], 0.0)

    worst = float(problem.residuals(values).max(initial=0.0))
    if worst > feasibility_tol:
        raise LpError(f"numerical trouble: solution violates a row by {worst:g}")

    logger.debug("simplex: optimal after %d pivots", tableau.iterations)
    return LpResult(
        status=LpStatus.OPTIMAL,
        values=tuple(float(v) for v in values),
        objective=float(problem.objective @ values),
    )


def _drive_out_artificials(tableau: _Tableau, artificial_start: int) -> None:
    """
    Pivot basic artificials (all at zero after a feasible phase 1) onto real
    columns; rows where that is impossible are redundant and get dropped.
    """
    redundant = []
    for row in range(tableau.rows):
        if tableau.basis[row] < artificial_start:
            continue
        candidates = np.flatnonzero(
            np.abs(tableau.table[row, :artificial_start]) > tableau.pivot_tol
        )
        if candidates.size:
            tableau.pivot(row, int(candidates[0]))
        else:
            redundant.append(row)

    if redundant:
        logger.debug("simplex: dropping %d redundant rows", len(redundant))
        tableau.table = np.delete(tableau.table, redundant, axis=0)
        tableau.basis = [c for r, c in enumerate(tableau.basis) if r not in redundant]
