from typing import List, Optional, Sequence

import networkx as nx

from .models import Instance


def to_digraph(instance: Instance) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(instance.task_count))
    graph.add_edges_from(instance.edges)
    return graph


def topological_order(instance: Instance) -> List[int]:
    """
    Kahn's algorithm one generation at a time: every task whose predecessors all
    sit in earlier generations, each generation in ascending id order.

    >>> from hybrid_sched.models import Task
    >>> tasks = [Task(id=j, cpu=1, gpu=1) for j in range(4)]
    >>> diamond = Instance(m=1, k=1, tasks=tasks, edges=[(0, 1), (0, 2), (1, 3), (2, 3)])
    >>> topological_order(diamond)
    [0, 1, 2, 3]
    """
    order: List[int] = []
    for generation in nx.topological_generations(to_digraph(instance)):
        order.extend(sorted(generation))
    return order


def is_topological(instance: Instance, order: Sequence[int]) -> bool:
    if sorted(order) != list(range(instance.task_count)):
        return False

    position = {task: index for index, task in enumerate(order)}
    return all(position[source] < position[target] for source, target in instance.edges)


def longest_path(
    instance: Instance,
    weights: Sequence[float],
    order: Optional[Sequence[int]] = None,
) -> float:
    """
    Heaviest path weight where each task contributes `weights[task]`, computed in
    one pass over a topological order.
    """
    if order is None:
        order = topological_order(instance)

    preds = instance.predecessors()
    finish = [0.0] * instance.task_count
    for task in order:
        finish[task] = weights[task] + max((finish[p] for p in preds[task]), default=0.0)

    return max(finish, default=0.0)


def tail_lengths(instance: Instance, weights: Sequence[float]) -> List[float]:
    """Longest path from each task to a sink, the task's own weight included."""
    succs = instance.successors()
    tails = [0.0] * instance.task_count
    for task in reversed(topological_order(instance)):
        tails[task] = weights[task] + max((tails[s] for s in succs[task]), default=0.0)
    return tails
