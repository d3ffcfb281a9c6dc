"""
Layered q-partite graphs and their planted YES partitions.

Vertex ids are dense: layer l holds the ids l*n .. l*n + n - 1.  In a YES graph
every layer is split into Q classes and no edge goes from a class to a smaller
class of the next layer.
"""
import logging
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from ..exceptions import InvalidInputError

logger = logging.getLogger(__name__)

# recovers 1/16 rather than its binary expansion
RATIONAL_DENOMINATOR_LIMIT = 10**9


def as_fraction(value: float) -> Fraction:
    """
    >>> as_fraction(1 / 9)
    Fraction(1, 9)
    """
    return Fraction(value).limit_denominator(RATIONAL_DENOMINATOR_LIMIT)


class ReductionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: PositiveInt = Field(description="Number of layers, a multiple of 3.")
    Q: int = Field(gt=1, description="Number of classes per layer.")
    n: PositiveInt = Field(description="Vertices per layer, more than Q.")
    epsilon: float = Field(gt=0, description="Class size slack, at most 1/Q².")
    delta: float = Field(gt=0, description="Soundness density, at most 1/(2Q).")

    @model_validator(mode="after")
    def _constraints(self) -> "ReductionParams":
        if self.q % 3:
            raise ValueError("q must be a multiple of 3")
        if self.n <= self.Q:
            raise ValueError("n must exceed Q")
        if self.epsilon_fraction > Fraction(1, self.Q**2):
            raise ValueError("epsilon must be at most 1/Q²")
        if self.delta_fraction > Fraction(1, 2 * self.Q):
            raise ValueError("delta must be at most 1/(2Q)")
        return self

    @property
    def epsilon_fraction(self) -> Fraction:
        return as_fraction(self.epsilon)

    @property
    def delta_fraction(self) -> Fraction:
        return as_fraction(self.delta)

    @property
    def class_floor(self) -> Fraction:
        """Smallest class size allowed in a YES partition, (1 - epsilon) n / Q."""
        return (1 - self.epsilon_fraction) * self.n / self.Q


class QPartiteGraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    layers: Tuple[Tuple[int, ...], ...]
    edges: Tuple[Tuple[int, int], ...] = ()
    planted: Optional[Tuple[int, ...]] = Field(
        default=None, description="Class label of every vertex, when known."
    )

    @model_validator(mode="after")
    def _layered(self) -> "QPartiteGraph":
        size = len(self.layers[0]) if self.layers else 0
        for index, layer in enumerate(self.layers):
            if layer != tuple(range(index * size, (index + 1) * size)):
                raise ValueError(f"layer {index} must hold ids {index * size}..")

        for source, target in self.edges:
            if not 0 <= source < self.vertex_count or not 0 <= target < self.vertex_count:
                raise ValueError(f"edge ({source}, {target}) references an unknown vertex")
            if self.layer_of(target) != self.layer_of(source) + 1:
                raise ValueError(f"edge ({source}, {target}) skips a layer")

        if self.planted is not None and len(self.planted) != self.vertex_count:
            raise ValueError("one planted label per vertex is required")
        return self

    @property
    def q(self) -> int:
        return len(self.layers)

    @property
    def n(self) -> int:
        return len(self.layers[0]) if self.layers else 0

    @property
    def vertex_count(self) -> int:
        return self.q * self.n

    def layer_of(self, vertex: int) -> int:
        return vertex // self.n


def balanced_class_sizes(n: int, Q: int) -> List[int]:
    """
    >>> balanced_class_sizes(5, 4)
    [2, 1, 1, 1]
    """
    return [len(range(j, n, Q)) for j in range(Q)]


def qpartite_yes_graph(
    params: ReductionParams, edge_prob: float = 0.5, seed: int = 0
) -> QPartiteGraph:
    """
    A random layered graph with a planted YES partition: labels are v % Q per
    layer, shuffled with the seed, and each allowed edge (class of the source no
    larger than class of the target) is kept with probability `edge_prob`.
    """
    if not 0.0 <= edge_prob <= 1.0:
        raise InvalidInputError("edge probability must lie in [0, 1]")

    smallest = params.n // params.Q
    if smallest < params.class_floor:
        raise InvalidInputError(
            f"balanced classes of size {smallest} fall below the floor "
            f"(1 - epsilon) n / Q = {float(params.class_floor):.4g}"
        )

    rng = np.random.default_rng(seed)
    n = params.n
    labels = []
    for _ in range(params.q):
        layer_labels = np.arange(n) % params.Q
        rng.shuffle(layer_labels)
        labels.append(layer_labels)

    edges: List[Tuple[int, int]] = []
    for layer in range(params.q - 1):
        allowed = labels[layer][:, None] <= labels[layer + 1][None, :]
        keep = allowed & (rng.random((n, n)) < edge_prob)
        rows, columns = np.nonzero(keep)
        base = layer * n
        edges.extend(
            zip((base + rows).tolist(), (base + n + columns).tolist())
        )

    logger.debug(
        "q-partite YES graph: q=%d Q=%d n=%d, %d edges",
        params.q,
        params.Q,
        n,
        len(edges),
    )
    return QPartiteGraph(
        layers=tuple(tuple(range(i * n, (i + 1) * n)) for i in range(params.q)),
        edges=tuple(edges),
        planted=tuple(int(label) for layer in labels for label in layer),
    )


def check_yes_partition(graph: QPartiteGraph, params: ReductionParams) -> List[str]:
    """
    Re-derive the YES properties from the planted labels alone; returns the
    problems found, empty when the partition is a valid YES certificate.
    """
    if graph.q != params.q or graph.n != params.n:
        return [f"graph is {graph.q}x{graph.n}, parameters ask for {params.q}x{params.n}"]
    if graph.planted is None:
        return ["graph carries no planted labels"]

    labels = graph.planted
    problems = []
    if any(not 0 <= label < params.Q for label in labels):
        problems.append(f"labels must lie in 0..{params.Q - 1}")
        return problems

    for layer in graph.layers:
        counts = np.bincount([labels[v] for v in layer], minlength=params.Q)
        for label, count in enumerate(counts.tolist()):
            if count < params.class_floor:
                problems.append(
                    f"class {label} of layer {graph.layer_of(layer[0])} has {count} vertices"
                )

    for source, target in graph.edges:
        if labels[source] > labels[target]:
            problems.append(
                f"edge ({source}, {target}) goes from class {labels[source]} "
                f"to class {labels[target]}"
            )

    return problems
