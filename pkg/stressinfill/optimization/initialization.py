import math
from typing import Iterator

import numpy as np
from loguru import logger

from stressinfill.domain import CartesianGrid, ScalarField
from stressinfill.topology import TopologicalSkeleton


def _segment_touches_cell(
    p0: tuple[float, float], p1: tuple[float, float], i: int, j: int
) -> bool:
    """Closed segment against the closed square ``[i, i+1] x [j, j+1]``."""
    (x0, y0), (x1, y1) = p0, p1
    if max(x0, x1) < i or min(x0, x1) > i + 1 or max(y0, y1) < j or min(y0, y1) > j + 1:
        return False
    dx, dy = x1 - x0, y1 - y0
    sides = [dx * (cy - y0) - dy * (cx - x0) for cx, cy in ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))]
    return min(sides) <= 0.0 <= max(sides)


def supercover_cells(
    p0: tuple[float, float], p1: tuple[float, float], nx: int, ny: int
) -> Iterator[tuple[int, int]]:
    """Every grid cell whose closed square meets the closed segment ``p0 p1``."""
    (x0, y0), (x1, y1) = p0, p1
    i_low = max(math.ceil(min(x0, x1)) - 1, 0)
    i_high = min(math.floor(max(x0, x1)), nx - 1)
    j_low = max(math.ceil(min(y0, y1)) - 1, 0)
    j_high = min(math.floor(max(y0, y1)), ny - 1)
    for j in range(j_low, j_high + 1):
        for i in range(i_low, i_high + 1):
            if _segment_touches_cell(p0, p1, i, j):
                yield i, j


def rasterize_polyline(grid: CartesianGrid, vertices: np.ndarray) -> np.ndarray:
    """Active elements touched by a polyline, as a boolean per element."""
    touched = np.zeros(grid.n_elements, dtype=bool)
    vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
    segments = zip(vertices[:-1], vertices[1:]) if len(vertices) > 1 else [(vertices[0], vertices[0])]
    for start, end in segments:
        for i, j in supercover_cells(tuple(start), tuple(end), grid.nx, grid.ny):
            element = grid.element_index(i, j)
            if element is not None:
                touched[element] = True
    return touched


def skeleton_elements(skeleton: TopologicalSkeleton, grid: CartesianGrid) -> np.ndarray:
    touched = np.zeros(grid.n_elements, dtype=bool)
    for separatrix in skeleton.separatrices:
        vertices = separatrix.line.vertices
        if 0 <= separatrix.source < len(skeleton.points):
            # Bridge the seed offset so the skeleton reaches its degenerate point.
            source = np.array([skeleton.points[separatrix.source].position])
            vertices = np.vstack((source, vertices))
        if len(vertices):
            touched |= rasterize_polyline(grid, vertices)
    return touched


def skeleton_initialization(
    skeleton: TopologicalSkeleton, grid: CartesianGrid, alpha: ScalarField
) -> ScalarField:
    """Solid design variables along the skeleton, ``alpha`` elsewhere."""
    touched = skeleton_elements(skeleton, grid)
    phi = np.where(touched, 1.0, alpha.values)
    logger.info(f"Skeleton initialisation: {int(touched.sum())} of {grid.n_elements} elements solid")
    return ScalarField(grid, phi)
