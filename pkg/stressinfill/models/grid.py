from enum import Enum

import numpy as np
from pydantic import Field, model_validator

from stressinfill.models.shared import FrozenModel


class Direction(str, Enum):
    X = "x"
    Y = "y"

    @property
    def offset(self) -> int:
        offsets = {"x": 0, "y": 1}
        return offsets[self.value]


class FixedDof(FrozenModel):
    node: int = Field(ge=0)
    direction: Direction

    @property
    def dof(self) -> int:
        return 2 * self.node + self.direction.offset


class NodalLoad(FrozenModel):
    node: int = Field(ge=0)
    fx: float = 0.0
    fy: float = 0.0


class BoundaryConditions(FrozenModel):
    fixed_dofs: list[FixedDof]
    loads: list[NodalLoad] = []

    @model_validator(mode="after")
    def check_supports_and_loads(self) -> "BoundaryConditions":
        if not self.fixed_dofs:
            raise ValueError("at least one fixed degree of freedom is required")
        fixed = {fixed_dof.dof for fixed_dof in self.fixed_dofs}
        for load in self.loads:
            if load.fx != 0.0 and 2 * load.node in fixed:
                raise ValueError(f"load fx on node {load.node} acts on a fixed dof")
            if load.fy != 0.0 and 2 * load.node + 1 in fixed:
                raise ValueError(f"load fy on node {load.node} acts on a fixed dof")
        return self

    def fixed_dof_indices(self) -> np.ndarray:
        return np.unique([fixed_dof.dof for fixed_dof in self.fixed_dofs])

    def load_vector(self, n_dofs: int) -> np.ndarray:
        forces = np.zeros(n_dofs)
        for load in self.loads:
            forces[2 * load.node] += load.fx
            forces[2 * load.node + 1] += load.fy
        return forces

    def scaled(self, factor: float) -> "BoundaryConditions":
        return BoundaryConditions(
            fixed_dofs=self.fixed_dofs,
            loads=[
                NodalLoad(node=load.node, fx=factor * load.fx, fy=factor * load.fy)
                for load in self.loads
            ],
        )
