from .certificate import SlotLoad, YesCasePlan, yes_case_plan, yes_case_schedule
from .gap import GapReport, gap_bounds, gap_report
from .qpartite import (
    QPartiteGraph,
    ReductionParams,
    check_yes_partition,
    qpartite_yes_graph,
)
from .random_dag import random_layered_dag
from .reduction import corollary_instance, machine_counts, reduction_instance
