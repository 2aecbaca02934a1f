from enum import Enum

from pydantic import Field, computed_field

from stressinfill.models.shared import FrozenModel


class StressFamily(str, Enum):
    MAJOR = "major"
    MINOR = "minor"


class DegenerateKind(str, Enum):
    TRISECTOR = "trisector"
    WEDGE = "wedge"
    UNRESOLVED = "unresolved"

    @property
    def tensor_index(self) -> float | None:
        indices = {"trisector": -0.5, "wedge": 0.5, "unresolved": None}
        return indices[self.value]


class CellClass(str, Enum):
    EXCLUDED = "excluded"
    CANDIDATE = "candidate"


class TerminationReason(str, Enum):
    BOUNDARY = "boundary"
    NEAR_DEGENERATE_POINT = "near-degenerate-point"
    LOOP_CLOSED = "loop-closed"
    STEP_BUDGET = "step-budget"


class TensorGradient(FrozenModel):
    """Partial derivatives of the deviatoric tensor parts at a point.

    ``a`` and ``b`` are half the x/y derivatives of ``sxx - syy``, ``c`` and
    ``d`` the x/y derivatives of ``txy``.
    """

    a: float
    b: float
    c: float
    d: float

    @computed_field  # type: ignore[misc]
    @property
    def delta(self) -> float:
        return self.a * self.d - self.b * self.c

    @property
    def scale(self) -> float:
        return self.a**2 + self.b**2 + self.c**2 + self.d**2


class DegeneratePoint(FrozenModel):
    x: float
    y: float
    element: int = Field(ge=0)
    kind: DegenerateKind
    gradient: TensorGradient
    tangent_slopes: list[float] = []

    @property
    def position(self) -> tuple[float, float]:
        return self.x, self.y


class TracingSettings(FrozenModel):
    step: float = Field(default=0.5, gt=0)
    stop_radius: float = Field(default=0.5, gt=0)
    seed_offset: float = Field(default=1.0, gt=0)
    max_steps: int = Field(default=100000, ge=1)
    loop_min_steps: int = Field(default=10, ge=1)
    include_wedges: bool = False
    psl_spacing: float | None = Field(default=None, gt=0)
