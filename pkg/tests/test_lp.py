import numpy as np
import pytest
from pydantic import ValidationError

from hybrid_sched.config import LpLimits
from hybrid_sched.exceptions import CapacityExceededError, LpRequiresFiniteTimesError
from hybrid_sched.genlab.random_dag import random_layered_dag
from hybrid_sched.lp import (
    FractionalSolution,
    build_allocation_lp,
    check_relaxation,
    relaxed_loads,
    solve_relaxation,
)
from hybrid_sched.models import INCOMPATIBLE
from hybrid_sched.simplex import LpStatus, simplex_solve

from .utils import chain, diamond, make_instance


def test_single_task_rows() -> None:
    problem = build_allocation_lp(make_instance([4], [2]))

    assert problem.width == 3
    assert problem.variable_names == ("x0", "C0", "Cmax")
    assert problem.constraint_names == ("load_cpu", "load_gpu", "source_0", "cmax_0")


def test_chain_has_one_source_row_and_one_edge_row() -> None:
    problem = build_allocation_lp(chain(2))

    assert problem.constraint_names == (
        "load_cpu",
        "load_gpu",
        "source_0",
        "path_0_1",
        "cmax_0",
        "cmax_1",
    )


def test_empty_instance() -> None:
    instance = make_instance([], [])
    problem = build_allocation_lp(instance)

    assert problem.width == 1
    assert solve_relaxation(instance).objective == 0


def test_incompatible_times_are_rejected() -> None:
    with pytest.raises(LpRequiresFiniteTimesError, match="LP requires finite times"):
        build_allocation_lp(make_instance([INCOMPATIBLE], [1]))


def test_single_task_solution() -> None:
    solution = solve_relaxation(make_instance([4], [2]))

    assert solution.x[0] == pytest.approx(0.0, abs=1e-9)
    assert solution.objective == pytest.approx(2.0)


def test_two_independent_unit_tasks() -> None:
    solution = solve_relaxation(make_instance([1, 1], [1, 1]))

    assert solution.objective == pytest.approx(1.0)
    assert sum(solution.x) == pytest.approx(1.0)


def test_task_cap() -> None:
    with pytest.raises(CapacityExceededError, match="at least 4"):
        solve_relaxation(diamond(), limits=LpLimits(max_tasks=3))


@pytest.mark.parametrize("seed", range(10))
def test_solution_satisfies_relaxed_constraints(seed: int) -> None:
    instance = random_layered_dag(15, 4, 0.4, m=3, k=2, seed=seed)

    solution = solve_relaxation(instance)

    assert check_relaxation(instance, solution) == []
    assert all(0.0 <= x <= 1.0 for x in solution.x)


@pytest.mark.parametrize("seed", range(5))
def test_relaxed_loads_are_below_objective(seed: int) -> None:
    instance = random_layered_dag(12, 3, 0.5, m=2, k=1, seed=seed)
    solution = solve_relaxation(instance)

    w_cpu, w_gpu, critical_path = relaxed_loads(instance, solution)

    assert w_cpu / instance.m <= solution.objective + 1e-7
    assert w_gpu / instance.k <= solution.objective + 1e-7
    assert critical_path <= solution.objective + 1e-7


def test_check_relaxation_names_violated_rows() -> None:
    instance = chain(2, cpu=1, gpu=1)
    broken = FractionalSolution(x=(1.0, 1.0), completion=(1.0, 1.5), objective=1.0)

    assert check_relaxation(instance, broken) == ["load_cpu", "path_0_1", "cmax_1"]


def test_fractional_solution_checks_range() -> None:
    with pytest.raises(ValidationError, match=r"\[0, 1\]"):
        FractionalSolution(x=(1.5,), completion=(1.0,), objective=1.0)


@pytest.mark.parametrize("scale", [0.25, 3.0, 1000.0])
def test_objective_is_homogeneous_in_times(scale: float) -> None:
    instance = random_layered_dag(10, 3, 0.5, m=2, k=1, seed=7)
    scaled = make_instance(
        [t * scale for t in instance.cpu_time],  # type: ignore[operator]
        [t * scale for t in instance.gpu_time],  # type: ignore[operator]
        instance.edges,
        m=instance.m,
        k=instance.k,
    )

    base = solve_relaxation(instance).objective
    assert solve_relaxation(scaled).objective == pytest.approx(base * scale, rel=1e-7)


def test_allocation_lp_is_always_optimal() -> None:
    for seed in range(5):
        problem = build_allocation_lp(random_layered_dag(8, 2, 0.6, m=2, k=2, seed=seed))
        assert simplex_solve(problem).status is LpStatus.OPTIMAL


def test_build_is_deterministic() -> None:
    instance = random_layered_dag(10, 3, 0.5, seed=1)
    first, second = build_allocation_lp(instance), build_allocation_lp(instance)

    assert np.array_equal(first.matrix, second.matrix)
    assert simplex_solve(first) == simplex_solve(second)
