"""
Canonical file formats: instance, schedule and graph JSON, Gantt rows as CSV and
a CPLEX-LP style text dump of the allocation program.
"""
import csv
import io
from os import PathLike
from pathlib import Path
from typing import IO, Iterable, List, NamedTuple, Sequence, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from .exceptions import InvalidInputError
from .genlab.qpartite import QPartiteGraph
from .models import Instance, Schedule
from .simplex import LpProblem, Relation

Source = Union[bytes, str, PathLike, IO[bytes]]
Model = TypeVar("Model", bound=BaseModel)

GANTT_HEADER = ("machine", "task", "start", "end")


def _read(source: Source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, PathLike)):
        try:
            return Path(source).read_bytes()
        except OSError as e:
            raise InvalidInputError(f"cannot read `{source}`: {e.strerror}") from e
    return source.read()


def validation_message(error: ValidationError) -> str:
    message = error.errors()[0]["msg"]
    # validator messages come through prefixed with the error type
    return message.removeprefix("Value error, ")


def _parse(model: Type[Model], source: Source) -> Model:
    try:
        return model.model_validate_json(_read(source))
    except ValidationError as e:
        raise InvalidInputError(validation_message(e)) from e


def load_instance(source: Source) -> Instance:
    """
    Parse and validate an instance; `source` is raw JSON bytes, a path or a
    binary file object.

    >>> instance = load_instance(b'{"m":1,"k":1,"tasks":[{"id":0,"cpu":4,"gpu":"inc"}],"edges":[]}')
    >>> instance.task_count, instance.tasks[0].gpu
    (1, INCOMPATIBLE)
    >>> load_instance(b'{"m":1,"k":2,"tasks":[],"edges":[]}')
    Traceback (most recent call last):
        ...
    hybrid_sched.exceptions.InvalidInputError: m < k
    """
    return _parse(Instance, source)


def dump_instance(instance: Instance) -> str:
    return instance.model_dump_json()


def load_schedule(source: Source) -> Schedule:
    return _parse(Schedule, source)


def dump_schedule(schedule: Schedule) -> str:
    return schedule.model_dump_json()


def load_graph(source: Source) -> QPartiteGraph:
    return _parse(QPartiteGraph, source)


def dump_graph(graph: QPartiteGraph) -> str:
    return graph.model_dump_json()


class GanttRow(NamedTuple):
    machine: str
    task: int
    start: float
    end: float


def gantt_rows(instance: Instance, schedule: Schedule) -> List[GanttRow]:
    """One row per task, grouped by machine (CPUs first) and ordered by start."""
    rows = []
    for (pool, index), assignments in sorted(
        schedule.by_machine().items(), key=lambda item: (item[0][0].value, item[0][1])
    ):
        for assignment in assignments:
            duration = instance.tasks[assignment.id].duration_on(pool)
            rows.append(
                GanttRow(
                    machine=f"{pool.value}{index}",
                    task=assignment.id,
                    start=assignment.start,
                    end=assignment.start + duration,
                )
            )
    return rows


def dump_gantt_csv(instance: Instance, schedule: Schedule) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(GANTT_HEADER)
    for row in gantt_rows(instance, schedule):
        writer.writerow((row.machine, row.task, repr(row.start), repr(row.end)))
    return buffer.getvalue()


def _lp_terms(coefficients: Iterable[float], names: Sequence[str]) -> str:
    terms = []
    for value, name in zip(coefficients, names):
        if value == 0:
            continue
        sign = "-" if value < 0 else "+"
        magnitude = abs(float(value))
        coefficient = "" if magnitude == 1 else f"{magnitude!r} "
        terms.append(f"{sign} {coefficient}{name}")

    if not terms:
        return "0"
    text = " ".join(terms)
    return text[2:] if text.startswith("+ ") else text


def dump_lp(problem: LpProblem) -> str:
    """
    CPLEX-LP style text for cross-checking with an external solver.

    >>> print(dump_lp(LpProblem.from_rows([1.0], [([1.0], Relation.GE, 3.0)])), end="")
    Minimize
     obj: v0
    Subject To
     r0: v0 >= 3.0
    Bounds
     0.0 <= v0
    End
    """
    names = problem.variable_names or tuple(f"v{j}" for j in range(problem.width))
    rows = problem.constraint_names or tuple(
        f"r{i}" for i in range(len(problem.relations))
    )

    lines = ["Minimize", f" obj: {_lp_terms(problem.objective, names)}", "Subject To"]
    for name, row, relation, rhs in zip(
        rows, problem.matrix, problem.relations, problem.rhs
    ):
        lines.append(f" {name}: {_lp_terms(row, names)} {relation.value} {float(rhs)!r}")

    lines.append("Bounds")
    for name, low, high in zip(names, problem.lower, problem.upper):
        if high == float("inf"):
            lines.append(f" {float(low)!r} <= {name}")
        else:
            lines.append(f" {float(low)!r} <= {name} <= {float(high)!r}")
    lines.append("End")

    return "\n".join(lines) + "\n"
