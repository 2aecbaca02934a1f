"""Cartesian design domain shared by the analysis and optimization modules.

Elements are unit squares. Element ``(i, j)`` spans ``[i, i+1] x [j, j+1]``
with ``j`` counted upwards from the bottom edge; lattices are stored as
``(ny, nx)`` arrays indexed ``[j, i]``. Active elements are numbered
row-major with x running fastest.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.ndimage
import scipy.signal
from loguru import logger

from stressinfill.models.error import (
    EmptyMaskError,
    GridDimensionError,
    InvalidRadiusError,
    ParameterRangeError,
)
from stressinfill.models.parameter import (
    ConstantParameter,
    ParameterRole,
    ParameterSpec,
    RampParameter,
)

_DIRECT_KERNEL_LIMIT = 15
_RADIUS_SLACK = 1.0e-9


@dataclass(frozen=True, eq=False)
class CartesianGrid:
    nx: int
    ny: int
    active_mask: np.ndarray

    @cached_property
    def cells(self) -> np.ndarray:
        return np.flatnonzero(self.active_mask.ravel())

    @cached_property
    def n_elements(self) -> int:
        return int(self.cells.size)

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def is_rectangular(self) -> bool:
        return self.n_elements == self.nx * self.ny

    @cached_property
    def cell_to_element(self) -> np.ndarray:
        lookup = np.full(self.nx * self.ny, -1, dtype=np.int64)
        lookup[self.cells] = np.arange(self.n_elements)
        return lookup

    @cached_property
    def element_ij(self) -> np.ndarray:
        return np.column_stack((self.cells % self.nx, self.cells // self.nx))

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.element_ij + 0.5

    @cached_property
    def element_nodes(self) -> np.ndarray:
        """Corner nodes per element, counter-clockwise from bottom-left."""
        i, j = self.element_ij[:, 0], self.element_ij[:, 1]
        bottom_left = j * (self.nx + 1) + i
        top_left = bottom_left + self.nx + 1
        return np.column_stack((bottom_left, bottom_left + 1, top_left + 1, top_left))

    @cached_property
    def edof(self) -> np.ndarray:
        nodes = self.element_nodes
        dofs = np.empty((self.n_elements, 8), dtype=np.int64)
        dofs[:, 0::2] = 2 * nodes
        dofs[:, 1::2] = 2 * nodes + 1
        return dofs

    @cached_property
    def active_nodes(self) -> np.ndarray:
        active = np.zeros(self.n_nodes, dtype=bool)
        active[self.element_nodes.ravel()] = True
        return active

    @cached_property
    def node_coordinates(self) -> np.ndarray:
        nodes = np.arange(self.n_nodes)
        return np.column_stack((nodes % (self.nx + 1), nodes // (self.nx + 1))).astype(float)

    def node_index(self, i: int, j: int) -> int:
        return j * (self.nx + 1) + i

    def element_index(self, i: int, j: int) -> int | None:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            return None
        element = int(self.cell_to_element[j * self.nx + i])
        return element if element >= 0 else None

    def element_at(self, x: float, y: float) -> int | None:
        """Active element whose closed square holds ``(x, y)``."""
        if not (0.0 <= x <= self.nx and 0.0 <= y <= self.ny):
            return None
        i, j = min(int(math.floor(x)), self.nx - 1), min(int(math.floor(y)), self.ny - 1)
        columns = [i, i - 1] if x == i and i > 0 else [i]
        rows = [j, j - 1] if y == j and j > 0 else [j]
        for row in rows:
            for column in columns:
                element = self.element_index(column, row)
                if element is not None:
                    return element
        return None

    def contains(self, x: float, y: float) -> bool:
        return self.element_at(x, y) is not None

    def scatter(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
        lattice = np.full(self.nx * self.ny, fill, dtype=float)
        lattice[self.cells] = values
        return lattice.reshape(self.ny, self.nx)

    def gather(self, lattice: np.ndarray) -> np.ndarray:
        return np.asarray(lattice, dtype=float).ravel()[self.cells]


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: CartesianGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n_elements,):
            raise ValueError(
                f"field has shape {self.values.shape}, expected ({self.grid.n_elements},)"
            )

    @classmethod
    def constant(cls, grid: CartesianGrid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.n_elements, float(value)))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, np.asarray(values, dtype=float))

    def lattice(self, fill: float = np.nan) -> np.ndarray:
        return self.grid.scatter(self.values, fill=fill)

    def mean(self) -> float:
        return float(self.values.mean())

    def min(self) -> float:
        return float(self.values.min())

    def __len__(self) -> int:
        return self.values.size


def lattice_correlate(lattice: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Zero-padded correlation of a ``(ny, nx)`` lattice with an odd square kernel."""
    if kernel.shape[0] <= _DIRECT_KERNEL_LIMIT:
        return scipy.ndimage.correlate(lattice, kernel, mode="constant", cval=0.0)
    # Kernels here are point-symmetric, so convolution equals correlation.
    return scipy.signal.fftconvolve(lattice, kernel, mode="same")


def disk_kernel(radius: float) -> np.ndarray:
    half = int(math.floor(radius + _RADIUS_SLACK))
    offsets = np.arange(-half, half + 1)
    squared = offsets[None, :] ** 2 + offsets[:, None] ** 2
    return (squared <= radius**2 + _RADIUS_SLACK).astype(float)


def build_grid(nx: int, ny: int, mask: np.ndarray | None = None) -> CartesianGrid:
    if nx < 1 or ny < 1:
        raise GridDimensionError(nx=nx, ny=ny)
    if mask is None:
        active = np.ones((ny, nx), dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        if mask.size != nx * ny:
            raise EmptyMaskError(
                detail=f"Mask has {mask.size} entries, expected {nx * ny}."
            )
        active = mask.reshape(ny, nx).copy()
        if not active.any():
            raise EmptyMaskError()
    active.setflags(write=False)
    grid = CartesianGrid(nx=nx, ny=ny, active_mask=active)
    logger.info(f"Grid built: {nx}x{ny}, {grid.n_elements} active elements")
    return grid


def _sum_by_class(
    grid: CartesianGrid, classes: np.ndarray, kernels: tuple[np.ndarray, ...], values: np.ndarray
) -> np.ndarray:
    lattice = grid.scatter(values)
    result = np.empty(grid.n_elements)
    for index, kernel in enumerate(kernels):
        selected = classes == index
        result[selected] = grid.gather(lattice_correlate(lattice, kernel))[selected]
    return result


@dataclass(frozen=True, eq=False)
class NeighborhoodTable:
    """Disc neighbourhoods ``N_e`` of every active element.

    Elements sharing the same set of lattice offsets share one disc kernel,
    so heterogeneous radii cost one correlation per distinct disc.
    """

    grid: CartesianGrid
    radius: np.ndarray
    classes: np.ndarray
    kernels: tuple[np.ndarray, ...]
    counts: np.ndarray

    def members(self, element: int) -> np.ndarray:
        kernel = self.kernels[self.classes[element]]
        half = kernel.shape[0] // 2
        i, j = self.grid.element_ij[element]
        dj, di = np.nonzero(kernel)
        columns, rows = i + di - half, j + dj - half
        inside = (columns >= 0) & (columns < self.grid.nx) & (rows >= 0) & (rows < self.grid.ny)
        candidates = self.grid.cell_to_element[rows[inside] * self.grid.nx + columns[inside]]
        return np.sort(candidates[candidates >= 0])

    def sum(self, values: np.ndarray) -> np.ndarray:
        return _sum_by_class(self.grid, self.classes, self.kernels, values)

    def average(self, values: np.ndarray) -> np.ndarray:
        return self.sum(values) / self.counts

    def accumulate(self, weights: np.ndarray) -> np.ndarray:
        """``out_i = sum of weights_e over elements e with i in N_e``."""
        total = np.zeros((self.grid.ny, self.grid.nx))
        for index, kernel in enumerate(self.kernels):
            masked = np.where(self.classes == index, weights, 0.0)
            total += lattice_correlate(self.grid.scatter(masked), kernel)
        return self.grid.gather(total)


def build_neighborhoods(grid: CartesianGrid, R: ScalarField) -> NeighborhoodTable:
    radius = np.asarray(R.values, dtype=float)
    if radius.size and radius.min() <= 0.0:
        raise InvalidRadiusError(radius=float(radius.min()))
    # Discs are determined by the largest integer squared offset within reach.
    keys = np.floor(radius**2 + _RADIUS_SLACK).astype(np.int64)
    unique_keys, classes = np.unique(keys, return_inverse=True)
    classes = classes.ravel()
    kernels = tuple(disk_kernel(math.sqrt(key)) for key in unique_keys)
    counts = np.rint(_sum_by_class(grid, classes, kernels, np.ones(grid.n_elements)))
    logger.info(
        f"Neighbourhoods built: {len(kernels)} disc classes, "
        f"|N_e| in [{int(counts.min())}, {int(counts.max())}]"
    )
    return NeighborhoodTable(
        grid=grid, radius=radius, classes=classes, kernels=kernels, counts=counts
    )


def build_parameter_field(
    grid: CartesianGrid,
    spec: ParameterSpec,
    role: ParameterRole = ParameterRole.GENERIC,
) -> ScalarField:
    if isinstance(spec, RampParameter):
        left, right = spec.left, spec.right
    elif isinstance(spec, ConstantParameter):
        left = right = spec.value
    else:
        left = right = float(spec)
    if not (math.isfinite(left) and math.isfinite(right)):
        raise ParameterRangeError(parameter=role.value, value=left, allowed="finite values")
    x = grid.centroids[:, 0]
    values = np.full(grid.n_elements, left) if left == right else left + (right - left) * x / grid.nx
    if role is ParameterRole.ALPHA:
        for bad in (values.min(), values.max()):
            if not 0.0 < bad < 1.0:
                raise ParameterRangeError(parameter="alpha", value=float(bad), allowed="(0, 1)")
    if role is ParameterRole.RADIUS and values.min() <= 0.0:
        raise InvalidRadiusError(radius=float(values.min()))
    return ScalarField(grid, values)
