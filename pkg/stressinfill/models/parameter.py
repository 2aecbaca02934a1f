from enum import Enum
from typing import Annotated, Union

from pydantic import Field

from stressinfill.models.shared import FrozenModel


class ParameterRole(str, Enum):
    ALPHA = "alpha"
    RADIUS = "radius"
    GENERIC = "generic"


class ConstantParameter(FrozenModel):
    value: float


class RampParameter(FrozenModel):
    """Linear variation along x between the left and right domain edges."""

    ramp: Annotated[list[float], Field(min_length=2, max_length=2)]

    @property
    def left(self) -> float:
        return self.ramp[0]

    @property
    def right(self) -> float:
        return self.ramp[1]


ParameterSpec = Union[float, ConstantParameter, RampParameter]


def spec_bounds(spec: ParameterSpec) -> tuple[float, float]:
    if isinstance(spec, RampParameter):
        return min(spec.ramp), max(spec.ramp)
    if isinstance(spec, ConstantParameter):
        return spec.value, spec.value
    return float(spec), float(spec)
