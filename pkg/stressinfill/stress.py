"""Nodal stress tensor field of a solved design and its principal decomposition."""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from loguru import logger

from stressinfill.domain import CartesianGrid
from stressinfill.fem import CORNERS, DisplacementField, constitutive_matrix, strain_displacement
from stressinfill.models.error import OutsideDomainError
from stressinfill.models.material import MaterialModel

ISOTROPY_TOLERANCE = 1.0e-9


class StressTensor(NamedTuple):
    sxx: float
    syy: float
    txy: float

    @property
    def deviator(self) -> tuple[float, float]:
        """``(sxx - syy, txy)``, the pair vanishing at degenerate points."""
        return self.sxx - self.syy, self.txy

    @property
    def norm(self) -> float:
        return math.sqrt(self.sxx**2 + self.syy**2 + 2.0 * self.txy**2)

    def matrix(self) -> np.ndarray:
        return np.array([[self.sxx, self.txy], [self.txy, self.syy]])


class PrincipalDecomposition(NamedTuple):
    sigma1: float
    sigma2: float
    v1: tuple[float, float]
    v2: tuple[float, float]
    degenerate: bool

    def reconstruct(self) -> StressTensor:
        (x1, y1), (x2, y2) = self.v1, self.v2
        return StressTensor(
            sxx=self.sigma1 * x1 * x1 + self.sigma2 * x2 * x2,
            syy=self.sigma1 * y1 * y1 + self.sigma2 * y2 * y2,
            txy=self.sigma1 * x1 * y1 + self.sigma2 * x2 * y2,
        )


def _canonical(x: float, y: float) -> tuple[float, float]:
    if x < 0.0 or (x == 0.0 and y < 0.0):
        return -x, -y
    return x, y


def principal_decomposition(t: StressTensor) -> PrincipalDecomposition:
    mean = 0.5 * (t.sxx + t.syy)
    half_difference = 0.5 * (t.sxx - t.syy)
    radius = math.hypot(half_difference, t.txy)
    sigma1, sigma2 = mean + radius, mean - radius
    if t.txy == 0.0:
        v1, v2 = ((1.0, 0.0), (0.0, 1.0)) if t.sxx >= t.syy else ((0.0, 1.0), (1.0, 0.0))
    else:
        theta = 0.5 * math.atan2(2.0 * t.txy, t.sxx - t.syy)
        v1 = _canonical(math.cos(theta), math.sin(theta))
        v2 = _canonical(-math.sin(theta), math.cos(theta))
    degenerate = sigma1 - sigma2 <= ISOTROPY_TOLERANCE * max(1.0, abs(sigma1) + abs(sigma2))
    return PrincipalDecomposition(sigma1, sigma2, v1, v2, degenerate)


def principal_arrays(components: np.ndarray) -> dict[str, np.ndarray]:
    """Vectorised decomposition of ``(N, 3)`` tensors for tabular export."""
    sxx, syy, txy = components[:, 0], components[:, 1], components[:, 2]
    mean = 0.5 * (sxx + syy)
    radius = np.hypot(0.5 * (sxx - syy), txy)
    sigma1, sigma2 = mean + radius, mean - radius
    angle = np.degrees(0.5 * np.arctan2(2.0 * txy, sxx - syy))
    # Major direction folded into (-90, 90] so its x component is nonnegative.
    angle = np.where(angle <= -90.0, angle + 180.0, angle)
    isotropic = sigma1 - sigma2 <= ISOTROPY_TOLERANCE * np.maximum(
        1.0, np.abs(sigma1) + np.abs(sigma2)
    )
    return {"sigma1": sigma1, "sigma2": sigma2, "angle": angle, "isotropic": isotropic}


def bilinear_weights(u: float, v: float) -> np.ndarray:
    return np.array([(1.0 - u) * (1.0 - v), u * (1.0 - v), u * v, (1.0 - u) * v])


@dataclass(frozen=True, eq=False)
class NodalTensorField:
    """Stress tensors ``(sxx, syy, txy)`` stored per grid node.

    Nodes not attached to an active element hold zeros and are never
    evaluated.
    """

    grid: CartesianGrid
    values: np.ndarray

    @classmethod
    def from_function(
        cls, grid: CartesianGrid, tensor: Callable[[float, float], tuple[float, float, float]]
    ) -> "NodalTensorField":
        values = np.array([tensor(x, y) for x, y in grid.node_coordinates], dtype=float)
        return cls(grid, values)

    def tensor_at_node(self, node: int) -> StressTensor:
        return StressTensor(*map(float, self.values[node]))

    def cell_tensors(self, element: int) -> np.ndarray:
        """``(4, 3)`` corner tensors, counter-clockwise from bottom-left."""
        return self.values[self.grid.element_nodes[element]]

    def all_cell_tensors(self) -> np.ndarray:
        return self.values[self.grid.element_nodes]

    def eval_local(self, element: int, u: float, v: float) -> StressTensor:
        return StressTensor(*map(float, bilinear_weights(u, v) @ self.cell_tensors(element)))

    def eval_tensor(self, x: float, y: float) -> StressTensor:
        element = self.grid.element_at(x, y)
        if element is None:
            raise OutsideDomainError(x=x, y=y)
        i, j = self.grid.element_ij[element]
        return self.eval_local(element, x - i, y - j)

    def centroid_tensors(self) -> np.ndarray:
        return self.all_cell_tensors().mean(axis=1)

    def anisotropy(self) -> np.ndarray:
        """``(s1 - s2) / (|s1| + |s2|)`` at element centroids, 0 where both vanish."""
        principal = principal_arrays(self.centroid_tensors())
        spread = principal["sigma1"] - principal["sigma2"]
        magnitude = np.abs(principal["sigma1"]) + np.abs(principal["sigma2"])
        safe = np.where(magnitude > 0.0, magnitude, 1.0)
        return np.where(magnitude > 0.0, spread / safe, 0.0)


def recover_nodal_stress(
    grid: CartesianGrid, U: DisplacementField, mat: MaterialModel
) -> NodalTensorField:
    """Average the corner stresses of every element incident to a node."""
    D = constitutive_matrix(mat)
    ue = U.element_vectors
    nodes = grid.element_nodes
    totals = np.zeros((grid.n_nodes, 3))
    for corner, (u, v) in enumerate(CORNERS):
        stresses = ue @ (D @ strain_displacement(u, v)).T
        for component in range(3):
            totals[:, component] += np.bincount(
                nodes[:, corner], weights=stresses[:, component], minlength=grid.n_nodes
            )
    counts = np.bincount(nodes.ravel(), minlength=grid.n_nodes)
    values = totals / np.maximum(counts, 1)[:, None]
    logger.info(f"Recovered nodal stresses on {int(np.count_nonzero(counts))} nodes")
    return NodalTensorField(grid, values)
