import logging
from typing import Tuple

import numpy as np

from ..exceptions import InvalidInputError
from ..models import Instance, Task

logger = logging.getLogger(__name__)

TimeRange = Tuple[float, float]


def _check_range(name: str, time_range: TimeRange) -> None:
    low, high = time_range
    if not 0 < low <= high < float("inf"):
        raise InvalidInputError(
            f"{name} time range must satisfy 0 < low <= high, got {time_range}"
        )


def random_layered_dag(
    n: int,
    layers: int,
    edge_prob: float,
    cpu_range: TimeRange = (1.0, 10.0),
    gpu_range: TimeRange = (1.0, 10.0),
    m: int = 2,
    k: int = 1,
    seed: int = 0,
) -> Instance:
    """
    Random layered DAG: task j sits in layer j % layers, every pair of tasks in
    adjacent layers is joined with probability `edge_prob`, and the CPU and GPU
    times are uniform over their ranges.

    The draws are fully determined by `seed`:

    >>> a = random_layered_dag(8, 3, 0.5, seed=7)
    >>> a == random_layered_dag(8, 3, 0.5, seed=7)
    True
    >>> random_layered_dag(4, 1, 1.0).edges
    ()
    """
    if n < 0:
        raise InvalidInputError("task count must be non-negative")
    if layers < 1:
        raise InvalidInputError("at least one layer is required")
    if not 0.0 <= edge_prob <= 1.0:
        raise InvalidInputError("edge probability must lie in [0, 1]")
    _check_range("cpu", cpu_range)
    _check_range("gpu", gpu_range)
    if not m >= k >= 1:
        raise InvalidInputError("m < k")

    rng = np.random.default_rng(seed)
    cpu = rng.uniform(cpu_range[0], cpu_range[1], size=n)
    gpu = rng.uniform(gpu_range[0], gpu_range[1], size=n)

    members = [np.arange(layer, n, layers) for layer in range(layers)]
    edges = []
    for upper, lower in zip(members, members[1:]):
        draws = rng.random((upper.size, lower.size))
        rows, columns = np.nonzero(draws < edge_prob)
        edges.extend(zip(upper[rows].tolist(), lower[columns].tolist()))

    logger.debug("random layered dag: %d tasks, %d edges, seed %d", n, len(edges), seed)
    return Instance(
        m=m,
        k=k,
        tasks=tuple(
            Task(id=j, cpu=float(cpu[j]), gpu=float(gpu[j])) for j in range(n)
        ),
        edges=tuple(edges),
    )
