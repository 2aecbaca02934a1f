import math
from dataclasses import dataclass

import numpy as np

from stressinfill.domain import CartesianGrid, ScalarField, lattice_correlate
from stressinfill.models.error import InvalidRadiusError


def cone_kernel(radius: float) -> np.ndarray:
    half = max(int(math.ceil(radius)) - 1, 0)
    offsets = np.arange(-half, half + 1)
    distance = np.hypot(offsets[None, :], offsets[:, None])
    return np.maximum(0.0, radius - distance)


@dataclass(frozen=True, eq=False)
class DensityFilter:
    """Linear cone-weight filter, row-normalised over active elements."""

    grid: CartesianGrid
    radius: float
    kernel: np.ndarray
    normalizer: np.ndarray

    @classmethod
    def build(cls, grid: CartesianGrid, radius: float) -> "DensityFilter":
        if radius <= 0.0:
            raise InvalidRadiusError(radius=radius)
        kernel = cone_kernel(radius)
        normalizer = grid.gather(lattice_correlate(grid.scatter(np.ones(grid.n_elements)), kernel))
        return cls(grid=grid, radius=radius, kernel=kernel, normalizer=normalizer)

    @property
    def is_identity(self) -> bool:
        return self.kernel.shape == (1, 1)

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return np.array(values, dtype=float)
        return self.grid.gather(lattice_correlate(self.grid.scatter(values), self.kernel)) / self.normalizer

    def adjoint(self, values: np.ndarray) -> np.ndarray:
        if self.is_identity:
            return np.array(values, dtype=float)
        weighted = self.grid.scatter(np.asarray(values) / self.normalizer)
        return self.grid.gather(lattice_correlate(weighted, self.kernel))


def density_filter(phi: ScalarField, r: float) -> ScalarField:
    return phi.with_values(DensityFilter.build(phi.grid, r).apply(phi.values))


def filter_adjoint(sensitivities: np.ndarray, r: float, grid: CartesianGrid) -> np.ndarray:
    return DensityFilter.build(grid, r).adjoint(sensitivities)


def heaviside_project(phi_filtered: np.ndarray, beta: float) -> np.ndarray:
    """Smoothed Heaviside step around 0.5 with sharpness ``beta``."""
    half = math.tanh(0.5 * beta)
    return (half + np.tanh(beta * (np.asarray(phi_filtered) - 0.5))) / (2.0 * half)


def heaviside_derivative(phi_filtered: np.ndarray, beta: float) -> np.ndarray:
    half = math.tanh(0.5 * beta)
    return beta * (1.0 - np.tanh(beta * (np.asarray(phi_filtered) - 0.5)) ** 2) / (2.0 * half)
