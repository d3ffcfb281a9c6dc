from enum import Enum
from typing import Annotated, Dict, Iterable, List, Tuple, Union

import networkx as nx
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    ValidationInfo,
    field_validator,
    model_validator,
)

# Feasibility comparisons on start-time arithmetic.
TIME_TOLERANCE = 1e-9


class Side(str, Enum):
    CPU = "cpu"
    GPU = "gpu"

    @property
    def other(self) -> "Side":
        return Side.GPU if self is Side.CPU else Side.CPU


class Incompatible(Enum):
    """
    Marks a processor type a task cannot run on.

    This is deliberately not a float: `INCOMPATIBLE + 1` raises TypeError instead
    of quietly producing an infinity or a NaN.
    """

    INCOMPATIBLE = "inc"

    def __repr__(self) -> str:
        return "INCOMPATIBLE"


INCOMPATIBLE = Incompatible.INCOMPATIBLE

PositiveTime = Annotated[float, Field(gt=0, allow_inf_nan=False)]
Time = Union[PositiveTime, Incompatible]


def is_finite(time: Time) -> bool:
    return not isinstance(time, Incompatible)


class Task(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: NonNegativeInt
    cpu: Time = Field(description="Processing time on a CPU, or `inc`.")
    gpu: Time = Field(description="Processing time on a GPU, or `inc`.")

    def time_on(self, side: Side) -> Time:
        return self.cpu if side is Side.CPU else self.gpu

    def duration_on(self, side: Side) -> float:
        time = self.time_on(side)
        if isinstance(time, Incompatible):
            raise ValueError(f"task {self.id} cannot run on a {side.value.upper()}")
        return time

    @property
    def compatible_sides(self) -> Tuple[Side, ...]:
        return tuple(side for side in Side if is_finite(self.time_on(side)))


Edge = Tuple[NonNegativeInt, NonNegativeInt]


class Instance(BaseModel):
    """
    A hybrid scheduling instance: tasks with per-type processing times, a
    precedence DAG and the machine counts m (CPUs) >= k (GPUs).

    Tasks are kept sorted by id and ids must be dense 0..n-1.  Edges are
    deduplicated and sorted, which is the canonical form every other module
    relies on for deterministic output.
    """

    model_config = ConfigDict(frozen=True)

    m: PositiveInt
    k: PositiveInt
    tasks: Tuple[Task, ...] = ()
    edges: Tuple[Edge, ...] = ()

    @field_validator("tasks")
    @classmethod
    def _dense_tasks(cls, tasks: Tuple[Task, ...]) -> Tuple[Task, ...]:
        ordered = tuple(sorted(tasks, key=lambda task: task.id))
        for position, task in enumerate(ordered):
            if task.id != position:
                raise ValueError("task ids must be dense 0..n-1 without duplicates")
            if not task.compatible_sides:
                raise ValueError(f"task {task.id} has no finite processing time")
        return ordered

    @field_validator("edges")
    @classmethod
    def _canonical_edges(
        cls, edges: Tuple[Edge, ...], info: ValidationInfo
    ) -> Tuple[Edge, ...]:
        task_count = len(info.data.get("tasks", ()))
        for source, target in edges:
            if source == target:
                raise ValueError(f"self-loop on task {source}")
            if source >= task_count or target >= task_count:
                raise ValueError(f"edge ({source}, {target}) references an unknown task")
        return tuple(sorted(set(edges)))

    @model_validator(mode="after")
    def _check_platform_and_graph(self) -> "Instance":
        if self.m < self.k:
            raise ValueError("m < k")

        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.task_count))
        graph.add_edges_from(self.edges)
        if not nx.is_directed_acyclic_graph(graph):
            raise ValueError("cyclic graph")

        return self

    @property
    def task_count(self) -> int:
        return len(self.tasks)

    @property
    def cpu_time(self) -> Tuple[Time, ...]:
        return tuple(task.cpu for task in self.tasks)

    @property
    def gpu_time(self) -> Tuple[Time, ...]:
        return tuple(task.gpu for task in self.tasks)

    @property
    def all_finite(self) -> bool:
        return all(len(task.compatible_sides) == 2 for task in self.tasks)

    def pool_size(self, side: Side) -> int:
        return self.m if side is Side.CPU else self.k

    def predecessors(self) -> List[List[int]]:
        preds: List[List[int]] = [[] for _ in self.tasks]
        for source, target in self.edges:
            preds[target].append(source)
        return preds

    def successors(self) -> List[List[int]]:
        succs: List[List[int]] = [[] for _ in self.tasks]
        for source, target in self.edges:
            succs[source].append(target)
        return succs


class Allocation(BaseModel):
    model_config = ConfigDict(frozen=True)

    side: Tuple[Side, ...]

    @classmethod
    def from_cpu_flags(cls, flags: Iterable[int]) -> "Allocation":
        """
        Build an allocation from x^A values (1 = CPU, 0 = GPU).

        >>> Allocation.from_cpu_flags([1, 0]).side
        (<Side.CPU: 'cpu'>, <Side.GPU: 'gpu'>)
        """
        return cls(side=tuple(Side.CPU if flag else Side.GPU for flag in flags))

    @property
    def cpu_flags(self) -> Tuple[int, ...]:
        return tuple(1 if side is Side.CPU else 0 for side in self.side)

    def incompatible_tasks(self, instance: Instance) -> List[int]:
        """Ids of tasks allocated to a side where their time is INCOMPATIBLE."""
        return [
            task.id
            for task, side in zip(instance.tasks, self.side)
            if not is_finite(task.time_on(side))
        ]

    def durations(self, instance: Instance) -> List[float]:
        return [task.duration_on(side) for task, side in zip(instance.tasks, self.side)]


class Assignment(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: NonNegativeInt
    pool: Side
    machine: NonNegativeInt
    start: float = Field(allow_inf_nan=False)


class Schedule(BaseModel):
    """
    Start time and machine for every task.  `assignments` are kept sorted by
    task id; `makespan` is stored so that the JSON form is self describing and is
    re-derived by `validate_schedule`.
    """

    model_config = ConfigDict(frozen=True)

    makespan: float = Field(ge=0, allow_inf_nan=False)
    assignments: Tuple[Assignment, ...] = ()

    @field_validator("assignments")
    @classmethod
    def _sorted_by_id(cls, assignments: Tuple[Assignment, ...]) -> Tuple[Assignment, ...]:
        return tuple(sorted(assignments, key=lambda a: a.id))

    @classmethod
    def build(
        cls, instance: Instance, assignments: Iterable[Assignment]
    ) -> "Schedule":
        assignments = tuple(assignments)
        makespan = max(
            (
                a.start + instance.tasks[a.id].duration_on(a.pool)
                for a in assignments
            ),
            default=0.0,
        )
        return cls(makespan=makespan, assignments=assignments)

    @property
    def start(self) -> Tuple[float, ...]:
        return tuple(a.start for a in self.assignments)

    @property
    def machine(self) -> Tuple[Tuple[Side, int], ...]:
        return tuple((a.pool, a.machine) for a in self.assignments)

    def allocation(self) -> Allocation:
        return Allocation(side=tuple(a.pool for a in self.assignments))

    def by_machine(self) -> Dict[Tuple[Side, int], List[Assignment]]:
        machines: Dict[Tuple[Side, int], List[Assignment]] = {}
        for assignment in self.assignments:
            machines.setdefault((assignment.pool, assignment.machine), []).append(
                assignment
            )
        for tasks in machines.values():
            tasks.sort(key=lambda a: (a.start, a.id))
        return machines


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str = Field(
        description=(
            "One of `size`, `missing`, `pool`, `incompatible`, `machine`, `start`, "
            "`precedence`, `overlap`, `makespan`."
        )
    )
    subject: Tuple[int, ...] = Field(
        description="Task id, or the (source, target) pair of an edge or overlap."
    )
    detail: str


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool
    violations: Tuple[Violation, ...] = ()

    @model_validator(mode="after")
    def _ok_iff_empty(self) -> "ValidationReport":
        if self.ok != (not self.violations):
            raise ValueError("ok must be true exactly when there are no violations")
        return self

    @classmethod
    def from_violations(cls, violations: Iterable[Violation]) -> "ValidationReport":
        found = tuple(violations)
        return cls(ok=not found, violations=found)

    def kinds(self) -> List[str]:
        return [violation.kind for violation in self.violations]
