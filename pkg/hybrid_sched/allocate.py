import math
from typing import List, Union

from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from .exceptions import InvalidInputError
from .lp import FractionalSolution
from .models import Allocation, Instance, Side, is_finite

INFINITE = math.inf


class RoundingParams(BaseModel):
    """
    Threshold parameter b of the HLP-b rounding.  Finite values must be at least
    2; `INFINITE` (the m = k limit) makes 1/b exactly 0.
    """

    model_config = ConfigDict(frozen=True)

    b: float = Field(description="Rounding parameter, >= 2 or infinite.")

    @field_validator("b")
    @classmethod
    def _at_least_two(cls, value: float) -> float:
        if math.isnan(value) or value < 2:
            raise ValueError("b must be ≥ 2")
        return value

    @field_serializer("b", when_used="json")
    def _serialize_b(self, value: float) -> Union[float, str]:
        return "inf" if math.isinf(value) else value

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.b)

    @property
    def inverse(self) -> float:
        return 0.0 if self.is_infinite else 1.0 / self.b


def parse_b(value: Union[str, float]) -> RoundingParams:
    """
    Parse a user supplied b (`inf` accepted) into validated parameters.

    >>> parse_b("inf").is_infinite
    True
    >>> parse_b("1.5")
    Traceback (most recent call last):
        ...
    hybrid_sched.exceptions.InvalidInputError: b must be ≥ 2
    """
    try:
        number = float(value)
    except ValueError:
        raise InvalidInputError(f"b must be a number or `inf`, got `{value}`")

    if math.isnan(number) or number < 2:
        raise InvalidInputError("b must be ≥ 2")
    return RoundingParams(b=number)


def optimal_b(m: int, k: int) -> RoundingParams:
    """
    The b of the approximation guarantee: 1 + sqrt((2 - k/m) / (1 - k/m)).

    >>> round(optimal_b(2, 1).b, 7)
    2.7320508
    >>> optimal_b(3, 3).is_infinite
    True
    """
    if not m >= k >= 1:
        raise InvalidInputError("optimal_b needs m >= k >= 1")
    if m == k:
        return RoundingParams(b=INFINITE)

    ratio = k / m
    return RoundingParams(b=1.0 + math.sqrt((2.0 - ratio) / (1.0 - ratio)))


def round_hlpb(
    fractional: FractionalSolution, instance: Instance, params: RoundingParams
) -> Allocation:
    """
    Apply the HLP-b rules in order, first match wins:

    1. x >= 1 - 1/b                                -> CPU
    2. x <= 1/b                                    -> GPU
    3. 1/b < x < 1 - 1/b and p̄ >= p (GPU not slower) -> GPU
    4. 1/b < x < 1 - 1/b and p̄ < p                 -> CPU

    With b = 2 both thresholds are 1/2 and x = 1/2 matches rule 1.
    """
    if len(fractional.x) != instance.task_count:
        raise InvalidInputError("fractional solution and instance sizes differ")
    if not instance.all_finite:
        raise InvalidInputError("HLP-b rounding requires finite processing times")

    low = params.inverse
    high = 1.0 - low

    sides: List[Side] = []
    for x, task in zip(fractional.x, instance.tasks):
        if x >= high:
            sides.append(Side.CPU)
        elif x <= low:
            sides.append(Side.GPU)
        elif task.cpu >= task.gpu:  # type: ignore[operator]
            sides.append(Side.GPU)
        else:
            sides.append(Side.CPU)

    return Allocation(side=tuple(sides))


def round_half(fractional: FractionalSolution) -> Allocation:
    """
    The 1/2 rounding of the original HLP: GPU when x < 1/2, CPU otherwise.

    >>> round_half(FractionalSolution(x=(0.49, 0.5), completion=(1, 1), objective=1)).side
    (<Side.GPU: 'gpu'>, <Side.CPU: 'cpu'>)
    """
    return Allocation(side=tuple(Side.GPU if x < 0.5 else Side.CPU for x in fractional.x))


def fastest_allocation(instance: Instance) -> Allocation:
    """Each task on its faster processor type; ties and CPU-incompatible tasks go to GPU."""
    sides = []
    for task in instance.tasks:
        if not is_finite(task.cpu):
            sides.append(Side.GPU)
        elif not is_finite(task.gpu):
            sides.append(Side.CPU)
        else:
            sides.append(Side.CPU if task.cpu < task.gpu else Side.GPU)  # type: ignore
    return Allocation(side=tuple(sides))
