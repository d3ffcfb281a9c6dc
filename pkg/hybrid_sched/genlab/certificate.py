"""
Pipelined schedules certifying the YES case of a reduction instance.

Blocks of layer group z = layer // 3 are numbered by set index: type a blocks get
zQ + 1, type b blocks zQ + 2 and the l-th task of a type c chain zQ + 2 + l.
A block of class j with set index i runs in the unit slot [t - 1, t) with
t = i + j, so set indices advance with the layers while classes shift the whole
pipeline right by one slot each.  The last slot is qQ/3 + Q - 1.
"""
import logging
from collections import defaultdict
from typing import DefaultDict, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from ..exceptions import CertificateError, InvalidInputError
from ..models import Assignment, Instance, Schedule, Side
from ..validate import validate_schedule
from .qpartite import QPartiteGraph, ReductionParams, check_yes_partition
from .reduction import (
    TaskKind,
    VertexBlock,
    base_type_b_size,
    machine_counts,
    reduction_layout,
)

logger = logging.getLogger(__name__)


class SlotLoad(BaseModel):
    model_config = ConfigDict(frozen=True)

    slot: int
    cpu: int
    gpu: int


class YesCasePlan(BaseModel):
    """
    Set level certificate: per slot machine usage, checked against m and k,
    without materializing any task.
    """

    model_config = ConfigDict(frozen=True)

    m: int
    k: int
    type_b_size: int
    makespan: int
    yes_upper: int
    slots: Tuple[SlotLoad, ...]


def block_slots(block: VertexBlock, label: int, Q: int) -> List[Tuple[int, int]]:
    """(slot, task count) runs covering the block's tasks in task id order."""
    if not block.size:
        return []
    base = (block.layer // 3) * Q + label
    if block.kind is TaskKind.A:
        return [(base + 1, block.size)]
    if block.kind is TaskKind.B:
        return [(base + 2, block.size)]
    return [(base + 2 + step, 1) for step in range(1, block.size + 1)]


def _labels(graph: QPartiteGraph, params: ReductionParams) -> Tuple[int, ...]:
    if graph.planted is None:
        raise InvalidInputError("graph carries no planted labels")

    problems = check_yes_partition(graph, params)
    if problems:
        raise CertificateError(f"planted partition is not a YES partition: {problems[0]}")
    return graph.planted


def yes_case_plan(
    graph: QPartiteGraph,
    params: ReductionParams,
    type_b_size: Optional[int] = None,
    m: Optional[int] = None,
    k: Optional[int] = None,
) -> YesCasePlan:
    labels = _labels(graph, params)
    default_m, default_k = machine_counts(params)
    m = default_m if m is None else m
    k = default_k if k is None else k
    if type_b_size is None:
        type_b_size = base_type_b_size(params)

    blocks = reduction_layout(graph, params, type_b_size)
    usage: DefaultDict[int, List[int]] = defaultdict(lambda: [0, 0])
    span: Dict[int, Tuple[int, int]] = {}

    for block in blocks:
        runs = block_slots(block, labels[block.vertex], params.Q)
        if not runs:
            continue
        column = 1 if block.kind.on_gpu else 0
        for slot, count in runs:
            usage[slot][column] += count
        span[block.vertex] = (runs[0][0], runs[-1][0])

    for slot in sorted(usage):
        cpu, gpu = usage[slot]
        logger.debug("slot [%d, %d): %d CPU and %d GPU tasks", slot - 1, slot, cpu, gpu)
        if cpu > m:
            raise CertificateError(
                f"slot [{slot - 1}, {slot}) needs {cpu} CPUs, only {m} available"
            )
        if gpu > k:
            raise CertificateError(
                f"slot [{slot - 1}, {slot}) needs {gpu} GPUs, only {k} available"
            )

    for u, w in graph.edges:
        if u in span and w in span and span[u][1] >= span[w][0]:
            raise CertificateError(
                f"edge ({u}, {w}): block {u} ends in slot {span[u][1]} but block {w} "
                f"starts in slot {span[w][0]}"
            )

    makespan = max(usage, default=0)
    yes_upper = (params.q + 3) * params.Q // 3
    if makespan > yes_upper:
        raise CertificateError(f"makespan {makespan} exceeds {yes_upper}")

    return YesCasePlan(
        m=m,
        k=k,
        type_b_size=type_b_size,
        makespan=makespan,
        yes_upper=yes_upper,
        slots=tuple(
            SlotLoad(slot=slot, cpu=usage[slot][0], gpu=usage[slot][1])
            for slot in sorted(usage)
        ),
    )


def infer_type_b_size(instance: Instance, params: ReductionParams) -> int:
    """Type b block size of a reduction instance, recovered from its task count."""
    groups = (params.q // 3) * params.n
    per_group, remainder = divmod(instance.task_count, groups)
    type_b_size = per_group - (params.Q * params.n - params.Q) - (params.Q - 2)
    if remainder or type_b_size < 0:
        raise InvalidInputError("instance was not built from this graph and parameters")
    return type_b_size


def yes_case_schedule(
    instance: Instance, graph: QPartiteGraph, params: ReductionParams
) -> Schedule:
    """
    Materialize the pipelined schedule on a reduction instance (base or
    incompatibility variant) and validate it.  Machines are handed out per slot in
    task id order.
    """
    labels = _labels(graph, params)
    type_b_size = infer_type_b_size(instance, params)
    plan = yes_case_plan(graph, params, type_b_size, instance.m, instance.k)

    per_slot: DefaultDict[int, List[Tuple[int, Side]]] = defaultdict(list)
    for block in reduction_layout(graph, params, type_b_size):
        pool = Side.GPU if block.kind.on_gpu else Side.CPU
        tasks = iter(block.tasks)
        for slot, count in block_slots(block, labels[block.vertex], params.Q):
            per_slot[slot].extend((next(tasks), pool) for _ in range(count))

    assignments = []
    for slot in sorted(per_slot):
        next_machine = {Side.CPU: 0, Side.GPU: 0}
        for task, pool in sorted(per_slot[slot]):
            assignments.append(
                Assignment(
                    id=task, pool=pool, machine=next_machine[pool], start=float(slot - 1)
                )
            )
            next_machine[pool] += 1

    schedule = Schedule.build(instance, assignments)
    report = validate_schedule(instance, schedule.allocation(), schedule)
    if not report.ok:
        first = report.violations[0]
        raise CertificateError(
            f"certificate schedule fails validation: {first.kind}: {first.detail}"
        )
    if schedule.makespan != plan.makespan:
        raise CertificateError(
            f"materialized makespan {schedule.makespan} differs from the plan's "
            f"{plan.makespan}"
        )

    logger.info(
        "YES certificate: makespan %d <= %d on %d tasks",
        plan.makespan,
        plan.yes_upper,
        instance.task_count,
    )
    return schedule
