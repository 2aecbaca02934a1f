from enum import Enum
from typing import Annotated, Union

from pydantic import Field, model_validator

from stressinfill.models.grid import Direction
from stressinfill.models.material import MaterialModel, SolverSettings
from stressinfill.models.optimization import BetaSchedule, InitMode, MmaSettings
from stressinfill.models.parameter import ParameterSpec, spec_bounds
from stressinfill.models.shared import FrozenModel
from stressinfill.models.topology import TracingSettings

Pair = Annotated[list[float], Field(min_length=2, max_length=2)]
Quad = Annotated[list[float], Field(min_length=4, max_length=4)]


class Edge(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"


class LoadSelector(str, Enum):
    LEFT_MID = "left-mid"
    RIGHT_MID = "right-mid"
    TOP_MID = "top-mid"
    BOTTOM_MID = "bottom-mid"
    TOP_LEFT = "top-left"
    TOP_RIGHT = "top-right"
    BOTTOM_LEFT = "bottom-left"
    BOTTOM_RIGHT = "bottom-right"
    CENTER = "center"


class CircleCutout(FrozenModel):
    """Removes elements whose centroid lies inside ``[cx, cy, radius]``."""

    circle: Annotated[list[float], Field(min_length=3, max_length=3)]


class RectangleCutout(FrozenModel):
    """Removes elements whose centroid lies inside ``[x0, y0, x1, y1]``."""

    rectangle: Quad


class GridSection(FrozenModel):
    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    mask_file: str | None = None
    cutouts: list[Union[CircleCutout, RectangleCutout]] = []


class SupportSpec(FrozenModel):
    edge: Edge | None = None
    node: Pair | None = None
    box: Quad | None = None
    directions: list[Direction] = Field(default=[Direction.X, Direction.Y], min_length=1)

    @model_validator(mode="after")
    def check_single_selector(self) -> "SupportSpec":
        chosen = [name for name in ("edge", "node", "box") if getattr(self, name) is not None]
        if len(chosen) != 1:
            raise ValueError("a support needs exactly one of edge, node or box")
        return self


class LoadSpec(FrozenModel):
    at: Union[LoadSelector, Pair]
    fx: float = 0.0
    fy: float = 0.0


class OptimizationSection(FrozenModel):
    alpha: ParameterSpec
    alpha_total: float | None = Field(default=None, gt=0, lt=1)
    R: ParameterSpec
    r: float = Field(gt=0)
    p: float = Field(default=16.0, ge=1.0)
    beta: BetaSchedule = BetaSchedule()
    move_limit: float = Field(default=0.01, gt=0, le=1.0)
    max_iterations: int = Field(default=1000, ge=0)
    init: InitMode = InitMode.TOPO
    mma: MmaSettings = MmaSettings()

    @model_validator(mode="after")
    def check_ranges(self) -> "OptimizationSection":
        low, high = spec_bounds(self.alpha)
        if not (0.0 < low and high < 1.0):
            raise ValueError(f"alpha must stay inside (0, 1), got [{low}, {high}]")
        smallest_R = spec_bounds(self.R)[0]
        if smallest_R <= 0.0:
            raise ValueError(f"R must be positive, got {smallest_R}")
        if self.r >= smallest_R:
            raise ValueError(f"filter radius r={self.r} must satisfy r < R (min R = {smallest_R})")
        return self


class OutputSection(FrozenModel):
    directory: str | None = None
    snapshot_period: int = Field(default=0, ge=0)


class RunConfig(FrozenModel):
    grid: GridSection
    material: MaterialModel = MaterialModel()
    supports: list[SupportSpec] = Field(min_length=1)
    loads: list[LoadSpec] = []
    optimization: OptimizationSection
    tracing: TracingSettings = TracingSettings()
    solver: SolverSettings = SolverSettings()
    output: OutputSection = OutputSection()
    single_thread: bool = False
    seed: int = 0
