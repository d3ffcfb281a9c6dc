from typing import Dict, List, Tuple

from .models import (
    TIME_TOLERANCE,
    Allocation,
    Assignment,
    Instance,
    Schedule,
    Side,
    ValidationReport,
    Violation,
    is_finite,
)


def validate_schedule(
    instance: Instance,
    allocation: Allocation,
    schedule: Schedule,
    tolerance: float = TIME_TOLERANCE,
) -> ValidationReport:
    """
    Certify a schedule against the instance and the allocation it claims to follow.

    Every violation is reported, not just the first one.  Execution intervals are
    half-open, so a task may start exactly when the previous one on its machine ends.
    """
    violations: List[Violation] = []
    n = instance.task_count

    if len(allocation.side) != n:
        violations.append(
            Violation(
                kind="size",
                subject=(),
                detail=f"allocation covers {len(allocation.side)} tasks, instance has {n}",
            )
        )

    placed: Dict[int, Assignment] = {}
    for assignment in schedule.assignments:
        if assignment.id >= n:
            violations.append(
                Violation(
                    kind="size",
                    subject=(assignment.id,),
                    detail="schedule references a task the instance does not have",
                )
            )
        elif assignment.id in placed:
            violations.append(
                Violation(kind="size", subject=(assignment.id,), detail="scheduled twice")
            )
        else:
            placed[assignment.id] = assignment

    for task_id in range(n):
        if task_id not in placed:
            violations.append(
                Violation(kind="missing", subject=(task_id,), detail="task is not scheduled")
            )

    durations: Dict[int, float] = {}
    for task_id, assignment in sorted(placed.items()):
        task = instance.tasks[task_id]
        pool = assignment.pool

        if task_id < len(allocation.side) and allocation.side[task_id] is not pool:
            violations.append(
                Violation(
                    kind="pool",
                    subject=(task_id,),
                    detail=(
                        f"allocated to {allocation.side[task_id].value} "
                        f"but runs on {pool.value}"
                    ),
                )
            )

        pool_size = instance.pool_size(pool)
        if assignment.machine >= pool_size:
            violations.append(
                Violation(
                    kind="machine",
                    subject=(task_id,),
                    detail=f"{pool.value} index {assignment.machine} >= pool size {pool_size}",
                )
            )

        if assignment.start < -tolerance:
            violations.append(
                Violation(
                    kind="start",
                    subject=(task_id,),
                    detail=f"negative start {assignment.start!r}",
                )
            )

        time = task.time_on(pool)
        if not is_finite(time):
            violations.append(
                Violation(
                    kind="incompatible",
                    subject=(task_id,),
                    detail=f"task cannot run on a {pool.value}",
                )
            )
            continue

        durations[task_id] = time  # type: ignore[assignment]

    for source, target in instance.edges:
        if source not in durations or target not in placed:
            continue
        ready = placed[source].start + durations[source]
        if placed[target].start < ready - tolerance:
            violations.append(
                Violation(
                    kind="precedence",
                    subject=(source, target),
                    detail=(
                        f"task {target} starts at {placed[target].start!r} "
                        f"before {source} completes at {ready!r}"
                    ),
                )
            )

    violations.extend(_overlaps(placed, durations, tolerance))

    makespan = max(
        (placed[task_id].start + duration for task_id, duration in durations.items()),
        default=0.0,
    )
    if len(durations) == n and abs(makespan - schedule.makespan) > tolerance:
        violations.append(
            Violation(
                kind="makespan",
                subject=(),
                detail=f"declared {schedule.makespan!r}, derived {makespan!r}",
            )
        )

    return ValidationReport.from_violations(violations)


def _overlaps(
    placed: Dict[int, Assignment], durations: Dict[int, float], tolerance: float
) -> List[Violation]:
    machines: Dict[Tuple[Side, int], List[Assignment]] = {}
    for task_id in durations:
        assignment = placed[task_id]
        machines.setdefault((assignment.pool, assignment.machine), []).append(assignment)

    violations = []
    for (pool, index), assignments in sorted(machines.items()):
        assignments.sort(key=lambda a: (a.start, a.id))

        # task on this machine that currently ends last
        latest = None
        latest_end = float("-inf")
        for assignment in assignments:
            if latest is not None and assignment.start < latest_end - tolerance:
                violations.append(
                    Violation(
                        kind="overlap",
                        subject=(latest.id, assignment.id),
                        detail=(
                            f"tasks {latest.id} and {assignment.id} overlap on "
                            f"{pool.value} {index}"
                        ),
                    )
                )

            end = assignment.start + durations[assignment.id]
            if end > latest_end:
                latest, latest_end = assignment, end

    return violations
