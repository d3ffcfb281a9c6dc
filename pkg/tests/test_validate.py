import itertools

import numpy as np
import pytest

from hybrid_sched.models import INCOMPATIBLE, Allocation, Assignment, Schedule, Side
from hybrid_sched.validate import validate_schedule

from .utils import chain, make_instance, pairwise_overlaps

CPU, GPU = Side.CPU, Side.GPU


def schedule_of(instance, *placements):  # type: ignore[no-untyped-def]
    """Build a schedule from (pool, machine, start) triples given in task order."""
    assignments = [
        Assignment(id=task, pool=pool, machine=machine, start=start)
        for task, (pool, machine, start) in enumerate(placements)
    ]
    return Schedule.build(instance, assignments)


def test_single_gpu_task_is_valid() -> None:
    instance = make_instance([4], [2])
    schedule = schedule_of(instance, (GPU, 0, 0.0))

    report = validate_schedule(instance, schedule.allocation(), schedule)

    assert report.ok
    assert report.violations == ()


def test_precedence_violation() -> None:
    instance = chain(2)
    schedule = schedule_of(instance, (CPU, 0, 0.0), (GPU, 0, 0.5))

    report = validate_schedule(instance, schedule.allocation(), schedule)

    assert report.kinds() == ["precedence"]
    assert report.violations[0].subject == (0, 1)


def test_overlap_violation() -> None:
    instance = make_instance([2, 2], [1, 1], m=2)
    schedule = schedule_of(instance, (CPU, 0, 0.0), (CPU, 0, 1.0))

    report = validate_schedule(instance, schedule.allocation(), schedule)

    assert report.kinds() == ["overlap"]
    assert report.violations[0].subject == (0, 1)


def test_back_to_back_tasks_do_not_overlap() -> None:
    instance = make_instance([2, 2], [1, 1])
    schedule = schedule_of(instance, (CPU, 0, 0.0), (CPU, 0, 2.0))

    assert validate_schedule(instance, schedule.allocation(), schedule).ok


def test_tolerance_absorbs_float_noise() -> None:
    instance = chain(2, cpu=0.1, gpu=0.3)
    schedule = schedule_of(instance, (CPU, 0, 0.0), (CPU, 0, 0.1 - 1e-12))

    assert validate_schedule(instance, schedule.allocation(), schedule).ok


def test_every_violation_is_reported() -> None:
    instance = make_instance([1, 1, INCOMPATIBLE], [1, 1, 1], [(0, 1)])
    schedule = Schedule(
        makespan=5.0,
        assignments=[
            Assignment(id=0, pool=CPU, machine=3, start=0.0),
            Assignment(id=1, pool=GPU, machine=0, start=0.5),
            Assignment(id=2, pool=CPU, machine=0, start=-1.0),
        ],
    )
    allocation = Allocation(side=(CPU, CPU, CPU))

    report = validate_schedule(instance, allocation, schedule)

    assert sorted(report.kinds()) == ["incompatible", "machine", "pool", "precedence", "start"]


def test_missing_task_and_wrong_makespan() -> None:
    instance = make_instance([1, 1], [1, 1])
    schedule = Schedule(
        makespan=3.0, assignments=[Assignment(id=0, pool=CPU, machine=0, start=0.0)]
    )

    report = validate_schedule(instance, Allocation(side=(CPU, CPU)), schedule)
    assert report.kinds() == ["missing"]

    schedule = schedule_of(instance, (CPU, 0, 0.0), (GPU, 0, 0.0))
    wrong = schedule.model_copy(update={"makespan": 3.0})
    report = validate_schedule(instance, schedule.allocation(), wrong)
    assert report.kinds() == ["makespan"]


def test_allocation_size_mismatch() -> None:
    instance = make_instance([1], [1])
    schedule = schedule_of(instance, (CPU, 0, 0.0))

    report = validate_schedule(instance, Allocation(side=(CPU, CPU)), schedule)

    assert report.kinds() == ["size"]


def test_unknown_and_duplicate_tasks() -> None:
    instance = make_instance([1], [1])
    schedule = Schedule(
        makespan=1.0,
        assignments=[
            Assignment(id=0, pool=CPU, machine=0, start=0.0),
            Assignment(id=0, pool=CPU, machine=0, start=0.0),
            Assignment(id=4, pool=CPU, machine=0, start=0.0),
        ],
    )

    report = validate_schedule(instance, Allocation(side=(CPU,)), schedule)

    assert report.kinds() == ["size", "size"]


@pytest.mark.parametrize("seed", range(5))
def test_overlap_detection_matches_pairwise_scan(seed: int) -> None:
    rng = np.random.default_rng(seed)
    n = 8
    instance = make_instance(
        rng.integers(1, 4, size=n).astype(float).tolist(),
        rng.integers(1, 4, size=n).astype(float).tolist(),
        m=2,
        k=2,
    )

    for _ in range(50):
        placements = [
            (
                CPU if rng.random() < 0.5 else GPU,
                int(rng.integers(0, 2)),
                float(rng.integers(0, 6)),
            )
            for _ in range(n)
        ]
        schedule = schedule_of(instance, *placements)

        report = validate_schedule(instance, schedule.allocation(), schedule)

        overlapping = {
            frozenset(v.subject) for v in report.violations if v.kind == "overlap"
        }
        assert report.ok == (not pairwise_overlaps(instance, schedule))
        # the sweep reports one pair per overlapped task; all of them are real
        assert overlapping <= {
            frozenset(pair) for pair in pairwise_overlaps(instance, schedule)
        }


def test_validation_is_order_independent() -> None:
    instance = make_instance([1, 1, 1], [1, 1, 1])
    schedule = schedule_of(instance, (CPU, 0, 0.0), (CPU, 0, 0.5), (GPU, 0, 0.0))

    for permutation in itertools.permutations(schedule.assignments):
        shuffled = Schedule(makespan=schedule.makespan, assignments=permutation)
        report = validate_schedule(instance, schedule.allocation(), shuffled)
        assert report.kinds() == ["overlap"]
