"""
Batch comparison of HLP-b against the 1/2 rounding over a corpus of instances.
"""
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import IO, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from .bounds import theorem_bound, theoretical_ratio
from .config import LpLimits
from .exceptions import HybridSchedError
from .formats import load_instance
from .genlab.random_dag import random_layered_dag
from .lp import solve_relaxation
from .models import Instance
from .schedule import BChoice, run_pipeline

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-6

CSV_COLUMNS = (
    "instance_id",
    "status",
    "n",
    "m",
    "k",
    "b",
    "lp_bound",
    "makespan_hlpb",
    "makespan_half",
    "ratio_hlpb",
    "ratio_half",
    "theoretical_ratio",
    "wall_ms",
)

CorpusEntry = Tuple[str, Union[Instance, Path]]


class RunRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance_id: str
    status: str = "ok"
    n: Optional[int] = None
    m: Optional[int] = None
    k: Optional[int] = None
    b: Optional[float] = None
    lp_bound: Optional[float] = None
    makespan_hlpb: Optional[float] = None
    makespan_half: Optional[float] = None
    ratio_hlpb: Optional[float] = None
    ratio_half: Optional[float] = None
    theoretical_ratio: Optional[float] = None
    wall_ms: int = 0

    def csv_row(self) -> List[str]:
        row = []
        for column in CSV_COLUMNS:
            value = getattr(self, column)
            if value is None:
                row.append("")
            elif isinstance(value, float):
                row.append("inf" if math.isinf(value) else repr(value))
            else:
                row.append(str(value))
        return row


def run_instance(
    instance_id: str,
    source: Union[Instance, Path],
    b_choice: BChoice = "auto",
    timing: bool = False,
    lp_limits: LpLimits = LpLimits(),
) -> RunRecord:
    started = time.perf_counter()
    try:
        instance = source if isinstance(source, Instance) else load_instance(source)
        fractional = solve_relaxation(instance, limits=lp_limits)
        hlpb = run_pipeline(instance, "hlpb", b_choice, fractional=fractional)
        half = run_pipeline(instance, "half", fractional=fractional)
    except HybridSchedError as e:
        logger.warning("%s: %s (%s)", instance_id, e.kind, e)
        return RunRecord(instance_id=instance_id, status=e.kind)

    b = hlpb.diagnostics.b
    bound = theoretical_ratio(instance.m, instance.k)
    proven = theorem_bound(instance.m, instance.k, b) if b is not None else bound
    ratio_hlpb = hlpb.diagnostics.ratio

    status = "ok"
    if ratio_hlpb is not None and ratio_hlpb > proven + RATIO_TOLERANCE:
        logger.warning(
            "%s: ratio %r above the proven bound %r", instance_id, ratio_hlpb, proven
        )
        status = "bound-violated"

    return RunRecord(
        instance_id=instance_id,
        status=status,
        n=instance.task_count,
        m=instance.m,
        k=instance.k,
        b=b,
        lp_bound=hlpb.diagnostics.lp_bound,
        makespan_hlpb=hlpb.diagnostics.makespan,
        makespan_half=half.diagnostics.makespan,
        ratio_hlpb=ratio_hlpb,
        ratio_half=half.diagnostics.ratio,
        theoretical_ratio=bound,
        wall_ms=round((time.perf_counter() - started) * 1000) if timing else 0,
    )


def run_bench(
    entries: Iterable[CorpusEntry],
    workers: int = 1,
    b_choice: BChoice = "auto",
    timing: bool = False,
    lp_limits: LpLimits = LpLimits(),
) -> List[RunRecord]:
    """
    Run every entry on a bounded thread pool; records come back ordered by
    instance id whatever the completion order.
    """
    entries = list(entries)
    logger.info("bench: %d instances on %d workers", len(entries), workers)

    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="bench") as pool:
        records = list(
            pool.map(
                lambda entry: run_instance(
                    entry[0], entry[1], b_choice, timing, lp_limits
                ),
                entries,
            )
        )

    return sorted(records, key=lambda record: record.instance_id)


def load_corpus(directory: Path) -> List[CorpusEntry]:
    """Every `*.json` file of `directory`, keyed by file stem; parsed lazily."""
    return [(path.stem, path) for path in sorted(directory.glob("*.json"))]


def generate_corpus(
    count: int,
    seed: int = 0,
    task_range: Tuple[int, int] = (5, 200),
    max_cpus: int = 16,
) -> List[CorpusEntry]:
    """
    Random layered instances with n, m >= k, layer count and edge density drawn
    from one seeded generator.  Edge probability keeps roughly two successors
    per task whatever the layer width.
    """
    rng = np.random.default_rng(seed)
    entries: List[CorpusEntry] = []
    for index in range(count):
        n = int(rng.integers(task_range[0], task_range[1], endpoint=True))
        layers = int(rng.integers(1, max(1, min(n, 10)), endpoint=True))
        m = int(rng.integers(1, max_cpus, endpoint=True))
        k = int(rng.integers(1, m, endpoint=True))
        width = max(1, math.ceil(n / layers))
        instance = random_layered_dag(
            n,
            layers,
            min(1.0, 2.0 / width),
            cpu_range=(1.0, 20.0),
            gpu_range=(0.5, 20.0),
            m=m,
            k=k,
            seed=int(rng.integers(2**63)),
        )
        entries.append((f"random-{index:05d}", instance))
    return entries


def write_csv(records: Sequence[RunRecord], target: IO[str]) -> None:
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for record in records:
        writer.writerow(record.csv_row())
