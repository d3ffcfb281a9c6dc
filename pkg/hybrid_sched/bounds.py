"""
Lower bounds, the exact oracle for tiny instances and the theoretical ratio.

The oracle enumerates allocations (each task on every processor type it can run
on) and, for each allocation whose simple lower bound can still beat the
incumbent, searches schedules exactly.  The first incumbent is the list schedule
of the fastest processor allocation.

Dominance: for a regular objective such as the makespan, some optimal schedule is
semi-active, i.e. every task starts at max(completion of its predecessors,
completion of the previous task on its machine).  Every start time is therefore 0
or the completion time of another task, and a semi-active schedule is fixed by the
task sequence of each machine.  The search appends tasks in non-decreasing start
order (ties by id), which reaches every semi-active schedule exactly once up to
permutations of identical machines.  Identical machines are collapsed: two
machines giving the same start are interchangeable because afterwards both are
effectively free from that start on.

Pruning uses, at every node, the current makespan, the heads + tails path bound
of unplaced tasks and the per-pool load bound
(sum of effective machine availabilities + remaining work) / pool size.
"""
import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .allocate import fastest_allocation
from .config import LpLimits, OracleLimits
from .exceptions import CapacityExceededError, InvalidInputError
from .graph import longest_path, tail_lengths, topological_order
from .lp import LoadProfile, relaxed_loads, solve_relaxation
from .models import Allocation, Instance, Side, is_finite

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-9


def load_and_cp(instance: Instance, allocation: Allocation) -> LoadProfile:
    """W^A_CPU, W^A_GPU and the critical path CP^A under the allocated durations."""
    durations = allocation.durations(instance)
    w_cpu = sum(d for d, side in zip(durations, allocation.side) if side is Side.CPU)
    w_gpu = sum(d for d, side in zip(durations, allocation.side) if side is Side.GPU)
    return LoadProfile(
        w_cpu=w_cpu, w_gpu=w_gpu, critical_path=longest_path(instance, durations)
    )


def min_critical_path(instance: Instance) -> float:
    """Heaviest path when every task takes its smaller processing time."""
    weights = [
        min(time for time in (task.cpu, task.gpu) if is_finite(time))  # type: ignore
        for task in instance.tasks
    ]
    return longest_path(instance, weights)


def theoretical_ratio(m: int, k: int) -> float:
    """
    3 + 4 sqrt((1 - k/m) / (2 - k/m)); 3 when m = k, below 3 + 2 sqrt(2) always.

    >>> theoretical_ratio(4, 4)
    3.0
    >>> round(theoretical_ratio(2, 1), 4)
    5.3094
    """
    if not m >= k >= 1:
        raise InvalidInputError("theoretical_ratio needs m >= k >= 1")
    ratio = k / m
    return 3.0 + 4.0 * math.sqrt((1.0 - ratio) / (2.0 - ratio))


def theorem_bound(m: int, k: int, b: float) -> float:
    """
    Approximation bound of HLP-b for an arbitrary b,
    b/(b-1) (m+k)/m + b (m-k)/m + b/(b-1).  At `optimal_b(m, k)` it equals
    `theoretical_ratio(m, k)`; its exact minimiser is 1 + sqrt((2 + k/m) / (1 - k/m)).

    >>> theorem_bound(3, 3, math.inf)
    3.0
    >>> round(theorem_bound(2, 1, 1 + math.sqrt(3)), 4)
    5.3094
    """
    if math.isinf(b):
        if m != k:
            return math.inf
        return 3.0
    scale = b / (b - 1.0)
    return scale * (m + k) / m + b * (m - k) / m + scale


class BoundsReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    lp_bound: Optional[float] = Field(
        default=None,
        description="C^R_max; absent when the LP cannot be applied (INCOMPATIBLE times).",
    )
    load_cpu: float = Field(description="CPU load of the fractional allocation over m.")
    load_gpu: float = Field(description="GPU load of the fractional allocation over k.")
    min_critical_path: float
    exact_opt: Optional[float] = None

    def lower_bounds(self) -> List[float]:
        values = [self.load_cpu, self.load_gpu, self.min_critical_path]
        if self.lp_bound is not None:
            values.append(self.lp_bound)
        return values


def bounds_report(
    instance: Instance,
    with_oracle: bool = True,
    oracle_limits: OracleLimits = OracleLimits(),
    lp_limits: LpLimits = LpLimits(),
) -> BoundsReport:
    lp_bound = None
    if instance.all_finite:
        fractional = solve_relaxation(instance, limits=lp_limits)
        lp_bound = fractional.objective
        w_cpu, w_gpu, _ = relaxed_loads(instance, fractional)
    else:
        # only the loads every schedule must carry
        w_cpu = sum(t.cpu for t in instance.tasks if not is_finite(t.gpu))  # type: ignore
        w_gpu = sum(t.gpu for t in instance.tasks if not is_finite(t.cpu))  # type: ignore

    return BoundsReport(
        lp_bound=lp_bound,
        load_cpu=w_cpu / instance.m,
        load_gpu=w_gpu / instance.k,
        min_critical_path=min_critical_path(instance),
        exact_opt=exact_makespan(instance, oracle_limits) if with_oracle else None,
    )


def exact_makespan(instance: Instance, limits: OracleLimits = OracleLimits()) -> float:
    n = instance.task_count
    if n > limits.max_tasks or instance.m + instance.k > limits.max_machines:
        raise CapacityExceededError(
            f"instance too large for oracle: {n} tasks and {instance.m + instance.k} "
            f"machines, caps are {limits.max_tasks} and {limits.max_machines}"
        )
    if n == 0:
        return 0.0

    order = topological_order(instance)
    candidates = []
    for sides in itertools.product(*(task.compatible_sides for task in instance.tasks)):
        allocation = Allocation(side=sides)
        w_cpu, w_gpu, critical_path = load_and_cp(instance, allocation)
        bound = max(w_cpu / instance.m, w_gpu / instance.k, critical_path)
        candidates.append((bound, allocation.cpu_flags, allocation))
    candidates.sort(key=lambda item: (item[0], item[1]))

    # circular at module level: schedule needs load_and_cp
    from .schedule import list_schedule

    best = list_schedule(instance, fastest_allocation(instance)).makespan
    explored = 0
    for bound, _, allocation in candidates:
        if bound >= best - BOUND_TOLERANCE:
            break
        explored += 1
        best = _AllocationSearch(instance, allocation, order).run(best)

    logger.debug(
        "oracle: %d of %d allocations searched, optimum %r",
        explored,
        len(candidates),
        best,
    )
    return best


class _AllocationSearch:
    """Exact makespan for one fixed allocation, by depth first branch-and-bound."""

    def __init__(
        self, instance: Instance, allocation: Allocation, order: Sequence[int]
    ) -> None:
        self.n = instance.task_count
        self.order = list(order)
        self.pool = list(allocation.side)
        self.duration = allocation.durations(instance)
        self.preds = instance.predecessors()
        self.tails = tail_lengths(instance, self.duration)
        self.pool_size = {Side.CPU: instance.m, Side.GPU: instance.k}

        self.finish: List[Optional[float]] = [None] * self.n
        self.free = {side: [0.0] * size for side, size in self.pool_size.items()}
        self.remaining = {
            side: sum(d for d, p in zip(self.duration, self.pool) if p is side)
            for side in Side
        }
        self.best = math.inf

    def run(self, incumbent: float) -> float:
        self.best = incumbent
        self._branch(placed=0, last_start=0.0, last_task=-1, makespan=0.0)
        return self.best

    def _lower_bound(self, last_start: float, makespan: float) -> float:
        bound = makespan
        head = [0.0] * self.n
        for task in self.order:
            if self.finish[task] is not None:
                continue
            start = last_start
            for pred in self.preds[task]:
                pred_finish = self.finish[pred]
                if pred_finish is None:
                    pred_finish = head[pred] + self.duration[pred]
                start = max(start, pred_finish)
            head[task] = start
            bound = max(bound, start + self.tails[task])

        for side, free in self.free.items():
            if self.remaining[side] > 0:
                busy = sum(max(f, last_start) for f in free)
                bound = max(bound, (busy + self.remaining[side]) / self.pool_size[side])

        return bound

    def _branch(
        self, placed: int, last_start: float, last_task: int, makespan: float
    ) -> None:
        if placed == self.n:
            if makespan < self.best:
                self.best = makespan
            return

        if self._lower_bound(last_start, makespan) >= self.best - BOUND_TOLERANCE:
            return

        moves: List[Tuple[float, int, int]] = []
        for task in range(self.n):
            if self.finish[task] is not None:
                continue
            pred_finish = [self.finish[p] for p in self.preds[task]]
            if any(f is None for f in pred_finish):
                continue
            ready = max(pred_finish, default=0.0)  # type: ignore[type-var]

            seen = set()
            for index, free_at in enumerate(self.free[self.pool[task]]):
                start = max(ready, free_at)
                if start in seen:
                    continue
                seen.add(start)
                if start < last_start or (start == last_start and task < last_task):
                    continue
                moves.append((start, task, index))

        moves.sort()
        for start, task, index in moves:
            side = self.pool[task]
            end = start + self.duration[task]
            previous_free = self.free[side][index]

            self.finish[task] = end
            self.free[side][index] = end
            self.remaining[side] -= self.duration[task]

            self._branch(placed + 1, start, task, max(makespan, end))

            self.finish[task] = None
            self.free[side][index] = previous_free
            self.remaining[side] += self.duration[task]
