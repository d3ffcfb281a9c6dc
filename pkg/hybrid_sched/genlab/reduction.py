"""
Scheduling instances built from layered q-partite graphs.

Every vertex v of layer l becomes a block of tasks J_v whose shape depends on
l % 3:

* a: Q n - Q GPU tasks,
* b: n_b CPU tasks (Q n³ in the base reduction),
* c: a chain of Q - 2 GPU tasks.

A GPU task runs n times slower on a CPU, a CPU task n times slower on a GPU.
Every graph edge (u, w) becomes all precedence arcs J_u x J_w.
"""
import logging
import math
from enum import Enum
from typing import Dict, List, NamedTuple, Tuple

from ..config import ReductionLimits
from ..exceptions import CapacityExceededError, InvalidInputError
from ..models import INCOMPATIBLE, Instance, Task, Time
from .qpartite import QPartiteGraph, ReductionParams

logger = logging.getLogger(__name__)


class TaskKind(str, Enum):
    A = "a"
    B = "b"
    C = "c"

    @classmethod
    def of_layer(cls, layer: int) -> "TaskKind":
        return (cls.A, cls.B, cls.C)[layer % 3]

    @property
    def on_gpu(self) -> bool:
        return self is not TaskKind.B


class VertexBlock(NamedTuple):
    vertex: int
    layer: int
    kind: TaskKind
    first: int
    size: int

    @property
    def tasks(self) -> range:
        return range(self.first, self.first + self.size)


def machine_counts(params: ReductionParams) -> Tuple[int, int]:
    """
    m = ceil((1 + Q eps) n^4) CPUs and k = ceil((1 + Q eps) n^2) GPUs, in exact
    rational arithmetic.

    >>> machine_counts(ReductionParams(q=3, Q=4, n=5, epsilon=1 / 16, delta=1 / 8))
    (782, 32)
    """
    scale = 1 + params.Q * params.epsilon_fraction
    return math.ceil(scale * params.n**4), math.ceil(scale * params.n**2)


def base_type_b_size(params: ReductionParams) -> int:
    return params.Q * params.n**3


def corollary_type_b_size(params: ReductionParams, m_target: int, k: int) -> int:
    """
    >>> corollary_type_b_size(ReductionParams(q=3, Q=4, n=5, epsilon=1/16, delta=1/8), 64, 32)
    40
    """
    return (params.Q * m_target * params.n) // k


def block_size(kind: TaskKind, params: ReductionParams, type_b_size: int) -> int:
    if kind is TaskKind.A:
        return params.Q * params.n - params.Q
    if kind is TaskKind.B:
        return type_b_size
    return params.Q - 2


def reduction_layout(
    graph: QPartiteGraph, params: ReductionParams, type_b_size: int
) -> List[VertexBlock]:
    """One block per vertex, in vertex order; task ids are contiguous per block."""
    if graph.q != params.q or graph.n != params.n:
        raise InvalidInputError(
            f"graph is {graph.q}x{graph.n}, parameters ask for {params.q}x{params.n}"
        )

    blocks = []
    first = 0
    for layer, vertices in enumerate(graph.layers):
        kind = TaskKind.of_layer(layer)
        size = block_size(kind, params, type_b_size)
        for vertex in vertices:
            blocks.append(VertexBlock(vertex, layer, kind, first, size))
            first += size
    return blocks


def count_arcs(graph: QPartiteGraph, blocks: List[VertexBlock]) -> int:
    chains = sum(max(b.size - 1, 0) for b in blocks if b.kind is TaskKind.C)
    return chains + sum(blocks[u].size * blocks[w].size for u, w in graph.edges)


def _materialize(
    graph: QPartiteGraph,
    params: ReductionParams,
    type_b_size: int,
    m: int,
    k: int,
    times: Dict[TaskKind, Tuple[Time, Time]],
    limits: ReductionLimits,
) -> Instance:
    blocks = reduction_layout(graph, params, type_b_size)
    task_count = sum(block.size for block in blocks)
    arc_count = count_arcs(graph, blocks)

    if task_count > limits.max_tasks or arc_count > limits.max_arcs:
        raise CapacityExceededError(
            f"reduction needs {task_count} tasks and {arc_count} arcs; the caps are "
            f"{limits.max_tasks} tasks and {limits.max_arcs} arcs, raise them to at "
            f"least {task_count} and {arc_count}"
        )

    tasks = []
    edges: List[Tuple[int, int]] = []
    for block in blocks:
        cpu, gpu = times[block.kind]
        tasks.extend(Task(id=j, cpu=cpu, gpu=gpu) for j in block.tasks)
        if block.kind is TaskKind.C:
            edges.extend(zip(block.tasks, block.tasks[1:]))

    for u, w in graph.edges:
        for source in blocks[u].tasks:
            edges.extend((source, target) for target in blocks[w].tasks)

    logger.info(
        "reduction instance: m=%d k=%d, %d tasks, %d arcs", m, k, task_count, arc_count
    )
    return Instance(m=m, k=k, tasks=tuple(tasks), edges=tuple(edges))


def reduction_instance(
    graph: QPartiteGraph,
    params: ReductionParams,
    limits: ReductionLimits = ReductionLimits(),
) -> Instance:
    m, k = machine_counts(params)
    n = float(params.n)
    times: Dict[TaskKind, Tuple[Time, Time]] = {
        TaskKind.A: (n, 1.0),
        TaskKind.B: (1.0, 1.0 / n),
        TaskKind.C: (n, 1.0),
    }
    return _materialize(
        graph, params, base_type_b_size(params), m, k, times, limits
    )


def corollary_instance(
    graph: QPartiteGraph,
    params: ReductionParams,
    m_target: int,
    limits: ReductionLimits = ReductionLimits(),
) -> Instance:
    """
    Variant where every task runs on exactly one processor type and the CPU
    count is free; type b blocks grow to floor(Q m_target n / k) tasks.
    """
    _, k = machine_counts(params)
    if m_target < k:
        raise InvalidInputError(f"m_target must be at least k = {k}")

    times: Dict[TaskKind, Tuple[Time, Time]] = {
        TaskKind.A: (INCOMPATIBLE, 1.0),
        TaskKind.B: (1.0, INCOMPATIBLE),
        TaskKind.C: (INCOMPATIBLE, 1.0),
    }
    return _materialize(
        graph,
        params,
        corollary_type_b_size(params, m_target, k),
        m_target,
        k,
        times,
        limits,
    )
