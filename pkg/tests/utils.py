import itertools
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from hybrid_sched.bounds import load_and_cp
from hybrid_sched.models import Allocation, Incompatible, Instance, Schedule, Task
from hybrid_sched.validate import validate_schedule

Time = Union[float, Incompatible]


def make_instance(
    cpu: Sequence[Time],
    gpu: Sequence[Time],
    edges: Sequence[Tuple[int, int]] = (),
    m: int = 1,
    k: int = 1,
) -> Instance:
    return Instance(
        m=m,
        k=k,
        tasks=[Task(id=j, cpu=c, gpu=g) for j, (c, g) in enumerate(zip(cpu, gpu))],
        edges=list(edges),
    )


def chain(n: int, cpu: float = 1.0, gpu: float = 1.0, m: int = 1, k: int = 1) -> Instance:
    return make_instance(
        [cpu] * n, [gpu] * n, [(j, j + 1) for j in range(n - 1)], m=m, k=k
    )


def diamond(cpu: float = 1.0, gpu: float = 1.0, m: int = 1, k: int = 1) -> Instance:
    return make_instance(
        [cpu] * 4, [gpu] * 4, [(0, 1), (0, 2), (1, 3), (2, 3)], m=m, k=k
    )


def assert_valid_schedule(
    instance: Instance, schedule: Schedule, allocation: Optional[Allocation] = None
) -> None:
    if allocation is None:
        allocation = schedule.allocation()

    report = validate_schedule(instance, allocation, schedule)
    assert report.ok, report.violations
    assert not pairwise_overlaps(instance, schedule)

    w_cpu, w_gpu, critical_path = load_and_cp(instance, allocation)
    assert schedule.makespan <= w_cpu / instance.m + w_gpu / instance.k + critical_path + 1e-6


def pairwise_overlaps(instance: Instance, schedule: Schedule) -> List[Tuple[int, int]]:
    """Quadratic overlap scan, independent of the validator's sweep."""
    found = []
    for a, b in itertools.combinations(schedule.assignments, 2):
        if (a.pool, a.machine) != (b.pool, b.machine):
            continue
        a_end = a.start + instance.tasks[a.id].duration_on(a.pool)
        b_end = b.start + instance.tasks[b.id].duration_on(b.pool)
        if a.start < b_end - 1e-9 and b.start < a_end - 1e-9:
            found.append((a.id, b.id))
    return found


def forward_dags(n: int) -> Iterator[List[Tuple[int, int]]]:
    """Every edge set over 0..n-1 whose edges go from a smaller to a larger id."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        yield [pair for bit, pair in enumerate(pairs) if mask >> bit & 1]


def random_times(rng: np.random.Generator, n: int) -> Tuple[List[float], List[float]]:
    cpu = rng.integers(1, 8, size=n).astype(float).tolist()
    gpu = rng.integers(1, 8, size=n).astype(float).tolist()
    return cpu, gpu
