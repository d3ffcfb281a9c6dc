from pydantic import BaseModel, ConfigDict

from ..exceptions import InvalidInputError
from .qpartite import ReductionParams


class GapReport(BaseModel):
    """
    Makespan bounds on both sides of the reduction.  `yes_upper` is reached by
    the pipelined certificate; `no_lower` holds for every schedule of an instance
    built from a graph far from any YES partition.
    """

    model_config = ConfigDict(frozen=True)

    q: int
    Q: int
    ma: float
    mb: float
    mc: float
    no_lower: float
    yes_upper: float
    ratio: float
    limit: float


def gap_bounds(q: int, Q: int) -> GapReport:
    """
    >>> report = gap_bounds(3, 4)
    >>> round(report.no_lower, 3), report.yes_upper
    (4.476, 8.0)
    """
    if q < 3 or q % 3:
        raise InvalidInputError("q must be a positive multiple of 3")
    if Q < 2:
        raise InvalidInputError("Q must be at least 2")

    ma = (Q - 2) / (Q + 2) * Q
    mb = (Q - 2) / (Q + 3) * Q
    mc = float(Q - 2)
    no_lower = q / 3 * (ma + mb + mc)
    yes_upper = (q + 3) * Q / 3

    return GapReport(
        q=q,
        Q=Q,
        ma=ma,
        mb=mb,
        mc=mc,
        no_lower=no_lower,
        yes_upper=yes_upper,
        ratio=no_lower / yes_upper,
        limit=3 * q / (q + 3),
    )


def gap_report(params: ReductionParams) -> GapReport:
    return gap_bounds(params.q, params.Q)
