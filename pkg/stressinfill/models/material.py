from enum import Enum
from typing import Any

from pydantic import Field, model_validator

from stressinfill.models.shared import FrozenModel


class PlaneMode(str, Enum):
    STRESS = "stress"
    STRAIN = "strain"


class SolverKind(str, Enum):
    DIRECT = "direct"
    CG = "cg"


class MaterialModel(FrozenModel):
    E0: float = Field(default=1.0, gt=0)
    Emin: float = Field(gt=0)
    nu: float = Field(default=0.3, gt=-1.0, lt=0.5)
    gamma: float = Field(default=3.0, ge=1.0)
    plane: PlaneMode = PlaneMode.STRESS

    @model_validator(mode="before")
    @classmethod
    def default_void_modulus(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("Emin") is None:
            return {**data, "Emin": 1.0e-6 * float(data.get("E0", 1.0))}
        return data

    @model_validator(mode="after")
    def check_modulus_contrast(self) -> "MaterialModel":
        if self.Emin >= self.E0:
            raise ValueError(f"Emin={self.Emin} must be smaller than E0={self.E0}")
        return self

    @property
    def effective_nu(self) -> float:
        if self.plane is PlaneMode.STRAIN:
            return self.nu / (1.0 - self.nu)
        return self.nu

    @property
    def modulus_scale(self) -> float:
        if self.plane is PlaneMode.STRAIN:
            return 1.0 / (1.0 - self.nu**2)
        return 1.0


class SolverSettings(FrozenModel):
    kind: SolverKind = SolverKind.DIRECT
    tolerance: float = Field(default=1.0e-8, gt=0)
    max_iterations: int = Field(default=20000, ge=1)


class LinearSystemSummary(FrozenModel):
    solver: SolverKind
    iterations: int | None = None
    relative_residual: float
