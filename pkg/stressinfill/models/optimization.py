import math
from enum import Enum

from pydantic import Field

from stressinfill.models.shared import FrozenModel


class InitMode(str, Enum):
    UNIFORM = "uniform"
    TOPO = "topo"


class BetaSchedule(FrozenModel):
    initial: float = Field(default=1.0, gt=0)
    factor: float = Field(default=2.0, ge=1.0)
    period: int = Field(default=40, ge=1)
    cap: float = Field(default=128.0, gt=0)

    def at(self, iteration: int) -> float:
        """Projection sharpness used by 1-based ``iteration``."""
        steps = max(iteration - 1, 0) // self.period
        return min(self.cap, self.initial * self.factor**steps)


class MmaSettings(FrozenModel):
    c: float = Field(default=1000.0, gt=0)
    d: float = Field(default=1.0, gt=0)
    asy_init: float = Field(default=0.5, gt=0)
    asy_incr: float = Field(default=1.2, ge=1.0)
    asy_decr: float = Field(default=0.7, gt=0, le=1.0)
    kkt_tolerance: float = Field(default=1.0e-9, gt=0)
    max_dual_steps: int = Field(default=500, ge=1)


class HistoryRecord(FrozenModel):
    iteration: int = Field(ge=1)
    beta: float
    compliance: float
    g_local: float
    g_global: float | None = None
    sharpness: float
    mean_density: float

    def is_finite(self) -> bool:
        return math.isfinite(self.compliance) and math.isfinite(self.g_local)
