import heapq
import logging
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, field_serializer

from .allocate import (
    RoundingParams,
    fastest_allocation,
    optimal_b,
    parse_b,
    round_half,
    round_hlpb,
)
from .bounds import load_and_cp
from .config import LpLimits
from .exceptions import SchedulingError
from .graph import is_topological, topological_order
from .lp import FractionalSolution, solve_relaxation
from .models import Allocation, Assignment, Instance, Schedule, Side

logger = logging.getLogger(__name__)

GRAHAM_TOLERANCE = 1e-6

Rounding = Literal["hlpb", "half", "fastest"]
BChoice = Union[Literal["auto"], float, str]


class MachineState:
    """
    Per pool, the time each machine becomes free.  Free times only move forward.
    """

    def __init__(self, m: int, k: int) -> None:
        self.free_at: Dict[Side, List[float]] = {Side.CPU: [0.0] * m, Side.GPU: [0.0] * k}
        self._heaps: Dict[Side, List[Tuple[float, int]]] = {
            side: [(0.0, index) for index in range(len(times))]
            for side, times in self.free_at.items()
        }

    def earliest(self, pool: Side) -> Tuple[float, int]:
        """(free_at, index) of the machine free first; ties go to the lowest index."""
        return self._heaps[pool][0]

    def occupy(self, pool: Side, until: float) -> int:
        free_at, index = heapq.heappop(self._heaps[pool])
        if until < free_at:
            raise SchedulingError(f"{pool.value} {index} would move back in time")
        self.free_at[pool][index] = until
        heapq.heappush(self._heaps[pool], (until, index))
        return index


def list_schedule(
    instance: Instance,
    allocation: Allocation,
    priority: Optional[Sequence[int]] = None,
) -> Schedule:
    """
    Event driven List Scheduling.

    At every decision time each pool repeatedly takes its ready task with the
    smallest priority index and starts it on the machine that became free first
    (lowest index on ties), as long as that machine is already free.  No machine
    is left idle while a ready task of its pool waits.
    """
    n = instance.task_count
    if len(allocation.side) != n:
        raise SchedulingError("allocation and instance sizes differ")

    incompatible = allocation.incompatible_tasks(instance)
    if incompatible:
        raise SchedulingError(
            f"task {incompatible[0]} allocated to a processor type it cannot run on"
        )

    if priority is None:
        priority = topological_order(instance)
    elif not is_topological(instance, priority):
        raise SchedulingError("priority is not a topological order of the tasks")

    rank = {task: index for index, task in enumerate(priority)}
    durations = allocation.durations(instance)
    succs = instance.successors()
    waiting_on = [len(p) for p in instance.predecessors()]
    ready_at = [0.0] * n

    machines = MachineState(instance.m, instance.k)
    ready: Dict[Side, List[int]] = {Side.CPU: [], Side.GPU: []}
    for task in range(n):
        if waiting_on[task] == 0:
            heapq.heappush(ready[allocation.side[task]], rank[task])

    running: List[Tuple[float, int]] = []
    assignments: List[Assignment] = []
    now = 0.0

    while len(assignments) < n:
        for pool, queue in ready.items():
            while queue and machines.earliest(pool)[0] <= now:
                task = priority[heapq.heappop(queue)]
                start = max(machines.earliest(pool)[0], ready_at[task])
                end = start + durations[task]
                index = machines.occupy(pool, end)
                assignments.append(
                    Assignment(id=task, pool=pool, machine=index, start=start)
                )
                heapq.heappush(running, (end, rank[task]))

        if not running:
            if len(assignments) < n:
                raise SchedulingError("no task can start; the precedence graph is stuck")
            break

        # advance to the next completion and release every task finishing then
        now = running[0][0]
        while running and running[0][0] == now:
            _, finished_rank = heapq.heappop(running)
            for succ in succs[priority[finished_rank]]:
                waiting_on[succ] -= 1
                ready_at[succ] = max(ready_at[succ], now)
                if waiting_on[succ] == 0:
                    heapq.heappush(ready[allocation.side[succ]], rank[succ])

    return Schedule.build(instance, assignments)


class Diagnostics(BaseModel):
    model_config = ConfigDict(frozen=True)

    rounding: str
    lp_bound: Optional[float]
    b: Optional[float]
    w_cpu: float
    w_gpu: float
    critical_path: float
    graham_bound: float
    makespan: float
    ratio: Optional[float]

    @field_serializer("b", when_used="json")
    def _serialize_b(self, value: Optional[float]) -> Union[None, float, str]:
        if value is not None and value == float("inf"):
            return "inf"
        return value


class PipelineResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    fractional: Optional[FractionalSolution]
    allocation: Allocation
    schedule: Schedule
    diagnostics: Diagnostics


def resolve_b(instance: Instance, b_choice: BChoice) -> RoundingParams:
    if isinstance(b_choice, str) and b_choice == "auto":
        return optimal_b(instance.m, instance.k)
    return parse_b(b_choice)


def run_pipeline(
    instance: Instance,
    rounding: Rounding = "hlpb",
    b_choice: BChoice = "auto",
    priority: Optional[Sequence[int]] = None,
    lp_limits: LpLimits = LpLimits(),
    fractional: Optional[FractionalSolution] = None,
) -> PipelineResult:
    """
    Relaxed LP -> rounding -> List Scheduling, with the Graham bound
    W_CPU/m + W_GPU/k + CP checked on the produced schedule.

    A `fractional` solution already computed for `instance` is rounded as is, so
    several roundings can share one LP solve.

    `fastest` skips the LP and puts every task on its faster processor type; it
    is the only rounding available for instances with INCOMPATIBLE times.
    """
    params: Optional[RoundingParams] = None

    if rounding == "fastest":
        fractional = None
        allocation = fastest_allocation(instance)
    else:
        if rounding == "hlpb":
            params = resolve_b(instance, b_choice)
        if fractional is None:
            fractional = solve_relaxation(instance, limits=lp_limits)
        if params is not None:
            allocation = round_hlpb(fractional, instance, params)
        else:
            allocation = round_half(fractional)

    schedule = list_schedule(instance, allocation, priority)
    w_cpu, w_gpu, critical_path = load_and_cp(instance, allocation)
    graham = w_cpu / instance.m + w_gpu / instance.k + critical_path

    if schedule.makespan > graham + GRAHAM_TOLERANCE:
        raise SchedulingError(
            f"makespan {schedule.makespan!r} exceeds the list scheduling bound {graham!r}"
        )

    lp_bound = fractional.objective if fractional is not None else None
    ratio = None
    if lp_bound is not None:
        ratio = schedule.makespan / lp_bound if lp_bound > 0 else 1.0

    diagnostics = Diagnostics(
        rounding=rounding,
        lp_bound=lp_bound,
        b=params.b if params is not None else None,
        w_cpu=w_cpu,
        w_gpu=w_gpu,
        critical_path=critical_path,
        graham_bound=graham,
        makespan=schedule.makespan,
        ratio=ratio,
    )
    logger.info(
        "%s: b=%s makespan=%r lp_bound=%r ratio=%s",
        rounding,
        diagnostics.b,
        schedule.makespan,
        lp_bound,
        ratio,
    )

    return PipelineResult(
        fractional=fractional,
        allocation=allocation,
        schedule=schedule,
        diagnostics=diagnostics,
    )


def hlp_b(
    instance: Instance,
    b_choice: BChoice = "auto",
    lp_limits: LpLimits = LpLimits(),
) -> Tuple[Schedule, Diagnostics]:
    result = run_pipeline(instance, "hlpb", b_choice, lp_limits=lp_limits)
    return result.schedule, result.diagnostics
