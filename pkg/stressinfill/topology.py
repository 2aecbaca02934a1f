"""Degenerate points, separatrices and the topological skeleton of a stress field.

A degenerate point is where ``sxx - syy`` and ``txy`` vanish together. Inside
a cell both quantities are bilinear in the local coordinates ``(u, v)``, so
points are located per cell by Newton iterations and classified by the sign
of ``delta = a*d - b*c`` built from their derivatives.
"""

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from stressinfill.models.error import (
    FamilyAssignmentError,
    StructurallyUnstablePointError,
    TangentInconsistencyError,
)
from stressinfill.models.topology import (
    CellClass,
    DegenerateKind,
    DegeneratePoint,
    StressFamily,
    TensorGradient,
    TerminationReason,
    TracingSettings,
)
from stressinfill.stress import NodalTensorField, principal_decomposition

NEWTON_STARTS = ((0.25, 0.25), (0.75, 0.25), (0.75, 0.75), (0.25, 0.75), (0.5, 0.5))
NEWTON_ITERATIONS = 50
LOCATION_TOLERANCE = 1.0e-10
MERGE_DISTANCE = 1.0e-6
SLOPE_DEDUP = 1.0e-9
_CELL_SLACK = 1.0e-9
NEGLIGIBLE_STRESS = 1.0e-8
_BOUNDARY_BISECTIONS = 60


@dataclass(frozen=True, eq=False)
class PrincipalStressLine:
    family: StressFamily
    vertices: np.ndarray
    termination: TerminationReason

    @property
    def length(self) -> float:
        if len(self.vertices) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1).sum())


@dataclass(frozen=True, eq=False)
class Separatrix:
    source: int
    launch_angle: float
    line: PrincipalStressLine


@dataclass(frozen=True, eq=False)
class TopologicalSkeleton:
    points: list[DegeneratePoint] = field(default_factory=list)
    separatrices: list[Separatrix] = field(default_factory=list)

    @property
    def trisectors(self) -> list[DegeneratePoint]:
        return [point for point in self.points if point.kind is DegenerateKind.TRISECTOR]

    @property
    def wedges(self) -> list[DegeneratePoint]:
        return [point for point in self.points if point.kind is DegenerateKind.WEDGE]

    def is_empty(self) -> bool:
        return not self.points and not self.separatrices


def _deviator_corners(cell: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cell = np.asarray(cell, dtype=float)
    return cell[:, 0] - cell[:, 1], cell[:, 2]


def _uniform_sign(values: np.ndarray) -> bool:
    return bool(np.all(values > 0.0) or np.all(values < 0.0))


def classify_element(cell: np.ndarray) -> CellClass:
    """Exclude a cell when ``sxx - syy`` or ``txy`` keeps one strict sign on its corners."""
    difference, shear = _deviator_corners(cell)
    if _uniform_sign(difference) or _uniform_sign(shear):
        return CellClass.EXCLUDED
    return CellClass.CANDIDATE


def candidate_mask(cells: np.ndarray) -> np.ndarray:
    """Vectorised ``classify_element`` over ``(n, 4, 3)`` corner tensors."""
    difference = cells[:, :, 0] - cells[:, :, 1]
    shear = cells[:, :, 2]
    excluded = (
        np.all(difference > 0.0, axis=1)
        | np.all(difference < 0.0, axis=1)
        | np.all(shear > 0.0, axis=1)
        | np.all(shear < 0.0, axis=1)
    )
    return ~excluded


def _bilinear(corners: np.ndarray, u: float, v: float) -> float:
    c0, c1, c2, c3 = corners
    return c0 * (1 - u) * (1 - v) + c1 * u * (1 - v) + c2 * u * v + c3 * (1 - u) * v


def _bilinear_gradient(corners: np.ndarray, u: float, v: float) -> tuple[float, float]:
    c0, c1, c2, c3 = corners
    return (1 - v) * (c1 - c0) + v * (c2 - c3), (1 - u) * (c3 - c0) + u * (c2 - c1)


def locate_degenerate_points(
    cell: np.ndarray, tolerance: float = LOCATION_TOLERANCE
) -> list[tuple[float, float]]:
    """All distinct roots of the cell's bilinear deviator inside ``[0, 1]^2``."""
    difference, shear = _deviator_corners(cell)
    scale = float(max(np.abs(difference).max(), np.abs(shear).max()))
    if scale == 0.0:
        return []
    roots: list[tuple[float, float]] = []
    for start in NEWTON_STARTS:
        u, v = start
        for _ in range(NEWTON_ITERATIONS):
            residual = np.array([_bilinear(difference, u, v), _bilinear(shear, u, v)])
            if np.linalg.norm(residual) <= tolerance * scale:
                break
            jacobian = np.array(
                [_bilinear_gradient(difference, u, v), _bilinear_gradient(shear, u, v)]
            )
            try:
                du, dv = np.linalg.solve(jacobian, -residual)
            except np.linalg.LinAlgError:
                break
            u, v = u + du, v + dv
            if not (math.isfinite(u) and math.isfinite(v)):
                break
        else:
            continue
        residual = np.array([_bilinear(difference, u, v), _bilinear(shear, u, v)])
        if np.linalg.norm(residual) > tolerance * scale:
            continue
        if not (-_CELL_SLACK <= u <= 1 + _CELL_SLACK and -_CELL_SLACK <= v <= 1 + _CELL_SLACK):
            continue
        u, v = min(max(u, 0.0), 1.0), min(max(v, 0.0), 1.0)
        if all(math.hypot(u - ru, v - rv) > MERGE_DISTANCE for ru, rv in roots):
            roots.append((u, v))
    return roots


def locate_degenerate_point(
    cell: np.ndarray, tolerance: float = LOCATION_TOLERANCE
) -> tuple[float, float] | None:
    roots = locate_degenerate_points(cell, tolerance)
    return roots[0] if roots else None


def tensor_gradient_at(cell: np.ndarray, position: tuple[float, float]) -> TensorGradient:
    difference, shear = _deviator_corners(cell)
    u, v = position
    d_du, d_dv = _bilinear_gradient(difference, u, v)
    t_du, t_dv = _bilinear_gradient(shear, u, v)
    return TensorGradient(a=0.5 * d_du, b=0.5 * d_dv, c=t_du, d=t_dv)


def classify_degenerate_point(g: TensorGradient) -> DegenerateKind:
    if abs(g.delta) <= 1.0e-12 * (g.scale + 1.0):
        raise StructurallyUnstablePointError(delta=g.delta)
    return DegenerateKind.TRISECTOR if g.delta < 0.0 else DegenerateKind.WEDGE


def separatrix_tangents(
    g: TensorGradient, kind: DegenerateKind | None = None
) -> list[float]:
    """Real slopes ``dy/dx`` of the separatrices, ``inf`` for a vertical one."""
    coefficients = np.array([g.d, g.c + 2.0 * g.b, 2.0 * g.a - g.d, -g.c])
    magnitude = float(np.abs(coefficients).max())
    if magnitude == 0.0:
        if kind is DegenerateKind.TRISECTOR:
            raise TangentInconsistencyError(detail="all cubic coefficients vanish")
        return []
    negligible = np.abs(coefficients) <= 1.0e-12 * magnitude
    vertical = bool(negligible[0])
    leading = int(np.argmax(~negligible))
    trimmed = coefficients[leading:]
    slopes: list[float] = []
    for root in np.roots(trimmed) if trimmed.size > 1 else []:
        if abs(root.imag) > SLOPE_DEDUP * max(1.0, abs(root.real)):
            continue
        if all(abs(root.real - known) > SLOPE_DEDUP for known in slopes):
            slopes.append(float(root.real))
    slopes.sort()
    if vertical:
        slopes.append(math.inf)
    if kind is DegenerateKind.TRISECTOR and not slopes:
        raise TangentInconsistencyError(detail="trisector without a real tangent")
    if kind is DegenerateKind.TRISECTOR and len(slopes) != 3:
        logger.warning(f"Trisector has {len(slopes)} distinct tangents instead of 3")
    return slopes


def slope_rays(slopes: list[float]) -> list[np.ndarray]:
    """Unit launch directions, both orientations of every slope."""
    rays = []
    for slope in slopes:
        direction = np.array([0.0, 1.0]) if math.isinf(slope) else np.array([1.0, slope])
        direction /= np.linalg.norm(direction)
        rays.extend((direction, -direction))
    return rays


def _ray_alignment(
    field: NodalTensorField,
    point: DegeneratePoint,
    ray: np.ndarray,
    seed_offset: float,
) -> tuple[float, float]:
    """``(|v1 . ray|, |v2 . ray|)`` at the first usable sample along the ray."""
    for offset in (seed_offset, 2.0 * seed_offset):
        sample = np.asarray(point.position) + offset * np.asarray(ray)
        if not field.grid.contains(*sample):
            continue
        decomposition = principal_decomposition(field.eval_tensor(*sample))
        if decomposition.degenerate:
            continue
        return float(abs(decomposition.v1 @ ray)), float(abs(decomposition.v2 @ ray))
    x, y = np.asarray(point.position) + seed_offset * np.asarray(ray)
    raise FamilyAssignmentError(x=float(x), y=float(y))


def assign_ray_family(
    field: NodalTensorField,
    point: DegeneratePoint,
    ray: np.ndarray,
    seed_offset: float = 1.0,
) -> StressFamily:
    major, minor = _ray_alignment(field, point, ray, seed_offset)
    return StressFamily.MAJOR if major >= minor else StressFamily.MINOR


class _IsotropicPoint(Exception):
    pass


class _VertexHash:
    """Uniform spatial hash answering "is an old vertex within ``radius``"."""

    def __init__(self, radius: float) -> None:
        self.radius = radius
        self.buckets: dict[tuple[int, int], list[tuple[int, float, float]]] = defaultdict(list)

    def _key(self, x: float, y: float) -> tuple[int, int]:
        return int(math.floor(x / self.radius)), int(math.floor(y / self.radius))

    def add(self, index: int, x: float, y: float) -> None:
        self.buckets[self._key(x, y)].append((index, x, y))

    def revisits(self, x: float, y: float, newest_allowed: int) -> bool:
        kx, ky = self._key(x, y)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for index, vx, vy in self.buckets.get((kx + dx, ky + dy), ()):
                    if index <= newest_allowed and math.hypot(x - vx, y - vy) <= self.radius:
                        return True
        return False


def _direction(
    field: NodalTensorField, family: StressFamily, point: np.ndarray, reference: np.ndarray
) -> np.ndarray | None:
    if not field.grid.contains(point[0], point[1]):
        return None
    decomposition = principal_decomposition(field.eval_tensor(point[0], point[1]))
    if decomposition.degenerate:
        raise _IsotropicPoint()
    vector = np.array(decomposition.v1 if family is StressFamily.MAJOR else decomposition.v2)
    return vector if np.dot(vector, reference) >= 0.0 else -vector


def _clip_to_boundary(field: NodalTensorField, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
    for _ in range(_BOUNDARY_BISECTIONS):
        middle = 0.5 * (inside + outside)
        if field.grid.contains(middle[0], middle[1]):
            inside = middle
        else:
            outside = middle
    return inside


def trace_psl(
    field: NodalTensorField,
    seed: tuple[float, float] | np.ndarray,
    family: StressFamily,
    initial_direction: tuple[float, float] | np.ndarray,
    settings: TracingSettings | None = None,
    stop_points: np.ndarray | None = None,
) -> PrincipalStressLine:
    """Integrate one principal stress line with fixed-step RK4.

    ``stop_points`` are the degenerate points that end the line when it comes
    within ``settings.stop_radius`` of them.
    """
    settings = settings or TracingSettings()
    h = settings.step
    current = np.asarray(seed, dtype=float)
    heading = np.asarray(initial_direction, dtype=float)
    heading = heading / np.linalg.norm(heading)
    stops = np.empty((0, 2)) if stop_points is None else np.asarray(stop_points, dtype=float)
    vertices = [current.copy()]
    visited = _VertexHash(h)
    visited.add(0, *current)

    def finish(reason: TerminationReason) -> PrincipalStressLine:
        return PrincipalStressLine(family, np.array(vertices), reason)

    for step in range(1, settings.max_steps + 1):
        try:
            k1 = _direction(field, family, current, heading)
            k2 = None if k1 is None else _direction(field, family, current + 0.5 * h * k1, k1)
            k3 = None if k2 is None else _direction(field, family, current + 0.5 * h * k2, k2)
            k4 = None if k3 is None else _direction(field, family, current + h * k3, k3)
        except _IsotropicPoint:
            return finish(TerminationReason.NEAR_DEGENERATE_POINT)
        if k1 is None:
            return finish(TerminationReason.BOUNDARY)
        if k4 is None:
            target = current + h * k1
            vertices.append(_clip_to_boundary(field, current, target))
            return finish(TerminationReason.BOUNDARY)

        advance = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        following = current + advance
        if not field.grid.contains(following[0], following[1]):
            vertices.append(_clip_to_boundary(field, current, following))
            return finish(TerminationReason.BOUNDARY)

        vertices.append(following)
        if stops.size and np.hypot(*(stops - following).T).min() <= settings.stop_radius:
            return finish(TerminationReason.NEAR_DEGENERATE_POINT)
        if visited.revisits(following[0], following[1], step - settings.loop_min_steps):
            return finish(TerminationReason.LOOP_CLOSED)
        visited.add(step, *following)
        length = float(np.linalg.norm(advance))
        heading = advance / length if length > 0.0 else k1
        current = following

    logger.warning(f"PSL from {tuple(np.round(vertices[0], 3))} hit the step budget")
    return finish(TerminationReason.STEP_BUDGET)


def _launch(
    field: NodalTensorField,
    point: DegeneratePoint,
    index: int,
    family: StressFamily,
    ray: np.ndarray,
    settings: TracingSettings,
    stop_points: np.ndarray,
) -> Separatrix:
    seed = np.asarray(point.position) + settings.seed_offset * ray
    line = trace_psl(field, seed, family, ray, settings, stop_points)
    angle = math.degrees(math.atan2(ray[1], ray[0]))
    return Separatrix(source=index, launch_angle=angle, line=line)


def _scan_cells(field: NodalTensorField) -> list[DegeneratePoint]:
    grid = field.grid
    cells = field.all_cell_tensors()
    corner_magnitude = np.abs(cells).max(axis=2)
    # A vanishing corner tensor (clamped or unloaded region) is isotropic without
    # carrying topology; cells touching one are not searched.
    threshold = NEGLIGIBLE_STRESS * corner_magnitude.max(initial=0.0)
    loaded = corner_magnitude.min(axis=1, initial=np.inf) > threshold
    candidates = np.flatnonzero(candidate_mask(cells) & loaded)
    logger.info(f"{candidates.size} of {grid.n_elements} cells pass the sign pre-filter")
    points: list[DegeneratePoint] = []
    for element in candidates:
        i, j = grid.element_ij[element]
        for u, v in locate_degenerate_points(cells[element]):
            x, y = float(i + u), float(j + v)
            if any(math.hypot(x - p.x, y - p.y) <= MERGE_DISTANCE for p in points):
                continue
            gradient = tensor_gradient_at(cells[element], (u, v))
            try:
                kind = classify_degenerate_point(gradient)
            except StructurallyUnstablePointError as exc:
                logger.warning(f"Degenerate point at ({x:.4f}, {y:.4f}): {exc.message}")
                kind = DegenerateKind.UNRESOLVED
            slopes: list[float] = []
            if kind is not DegenerateKind.UNRESOLVED:
                try:
                    slopes = separatrix_tangents(gradient, kind)
                except TangentInconsistencyError as exc:
                    logger.warning(f"Degenerate point at ({x:.4f}, {y:.4f}): {exc.message}")
            points.append(
                DegeneratePoint(
                    x=x, y=y, element=int(element), kind=kind, gradient=gradient,
                    tangent_slopes=slopes,
                )
            )
    return points


def _rays_for(
    field: NodalTensorField,
    point: DegeneratePoint,
    settings: TracingSettings,
) -> list[tuple[StressFamily, np.ndarray]]:
    aligned = []
    for ray in slope_rays(point.tangent_slopes):
        try:
            major, minor = _ray_alignment(field, point, ray, settings.seed_offset)
        except FamilyAssignmentError as exc:
            logger.warning(exc.message)
            continue
        aligned.append((ray, major - minor))
    if point.kind is not DegenerateKind.WEDGE:
        return [
            (StressFamily.MAJOR if margin >= 0.0 else StressFamily.MINOR, ray)
            for ray, margin in aligned
        ]
    # A wedge launches one major and one minor line, each along its best-aligned ray.
    wedge = []
    for family, sign in ((StressFamily.MAJOR, 1.0), (StressFamily.MINOR, -1.0)):
        if not aligned:
            break
        best = max(range(len(aligned)), key=lambda k: sign * aligned[k][1])
        wedge.append((family, aligned.pop(best)[0]))
    return wedge


def extract_skeleton(
    field: NodalTensorField,
    settings: TracingSettings | None = None,
    n_jobs: int = 1,
) -> TopologicalSkeleton:
    settings = settings or TracingSettings()
    points = _scan_cells(field)
    launched = [DegenerateKind.TRISECTOR]
    if settings.include_wedges:
        launched.append(DegenerateKind.WEDGE)

    jobs = []
    for index, point in enumerate(points):
        if point.kind not in launched:
            continue
        others = np.array([p.position for k, p in enumerate(points) if k != index]).reshape(-1, 2)
        for family, ray in _rays_for(field, point, settings):
            jobs.append(delayed(_launch)(field, point, index, family, ray, settings, others))
    separatrices = list(Parallel(n_jobs=n_jobs)(jobs)) if jobs else []

    skeleton = TopologicalSkeleton(points=points, separatrices=separatrices)
    logger.info(
        f"Skeleton extracted: {len(skeleton.trisectors)} trisectors, "
        f"{len(skeleton.wedges)} wedges, {len(separatrices)} separatrices"
    )
    return skeleton


def trace_psl_field(
    field: NodalTensorField,
    spacing: float,
    settings: TracingSettings | None = None,
    stop_points: np.ndarray | None = None,
    n_jobs: int = 1,
) -> list[PrincipalStressLine]:
    """Major and minor lines seeded on a regular lattice, traced both ways."""
    settings = settings or TracingSettings()
    grid = field.grid
    jobs = []
    for y in np.arange(0.5 * spacing, grid.ny, spacing):
        for x in np.arange(0.5 * spacing, grid.nx, spacing):
            if not grid.contains(x, y):
                continue
            decomposition = principal_decomposition(field.eval_tensor(x, y))
            if decomposition.degenerate:
                continue
            for family, vector in (
                (StressFamily.MAJOR, decomposition.v1),
                (StressFamily.MINOR, decomposition.v2),
            ):
                for sign in (1.0, -1.0):
                    direction = sign * np.asarray(vector)
                    jobs.append(
                        delayed(trace_psl)(field, (x, y), family, direction, settings, stop_points)
                    )
    lines = list(Parallel(n_jobs=n_jobs)(jobs)) if jobs else []
    logger.info(f"Traced {len(lines)} principal stress lines at spacing {spacing}")
    return lines
