import math

from pydantic import Field

from stressinfill.models.optimization import HistoryRecord
from stressinfill.models.shared import FrozenModel
from stressinfill.models.topology import (
    DegenerateKind,
    DegeneratePoint,
    StressFamily,
    TerminationReason,
)


class DegeneratePointView(FrozenModel):
    x: float
    y: float
    element: int
    kind: DegenerateKind
    delta: float
    tangent_angles: list[float] = Field(
        default=[], description="separatrix tangent directions in degrees, (-90, 90]"
    )

    @classmethod
    def from_point(cls, point: DegeneratePoint) -> "DegeneratePointView":
        return cls(
            x=point.x,
            y=point.y,
            element=point.element,
            kind=point.kind,
            delta=point.gradient.delta,
            tangent_angles=[
                90.0 if math.isinf(slope) else math.degrees(math.atan(slope))
                for slope in point.tangent_slopes
            ],
        )


class SeparatrixView(FrozenModel):
    source: int
    family: StressFamily
    launch_angle: float
    termination: TerminationReason
    length: float
    vertex_count: int


class AnalysisView(FrozenModel):
    nx: int
    ny: int
    active_elements: int
    compliance: float
    relative_residual: float
    degenerate_points: list[DegeneratePointView] = []
    separatrices: list[SeparatrixView] = []


class MetricsView(FrozenModel):
    compliance: float
    g_local: float
    g_global: float | None = None
    sharpness: float
    mean_density: float


class RunSummary(FrozenModel):
    directory: str
    iterations: int
    final: HistoryRecord | None = None


class RunComparison(FrozenModel):
    first: RunSummary
    second: RunSummary
    common_iterations: int
    first_sharper: int = Field(description="iterations where the first run has lower sharpness")
