"""Per-element and per-node field files.

Element lattices are written as plain-text matrices with ``ny`` rows of
``nx`` values, row 0 being the top of the domain. Masked elements read and
write as ``nan``.
"""

from pathlib import Path

import numpy as np
from loguru import logger
from PIL import Image

from stressinfill.domain import CartesianGrid, ScalarField
from stressinfill.models.error import DensityFileError, OutputWriteError
from stressinfill.optimization.loop import OptimizationState
from stressinfill.stress import NodalTensorField, principal_arrays

GRAY_WHITE = 65535


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError:
        raise OutputWriteError(path=str(path))


def write_scalar_field(field: ScalarField, path: Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    try:
        np.savetxt(path, np.flipud(field.lattice(fill=np.nan)), fmt="%.9g")
    except OSError:
        raise OutputWriteError(path=str(path))
    return path


def density_gray_levels(rho: ScalarField) -> np.ndarray:
    """16-bit gray levels, solid black and void or masked white."""
    gray = np.rint((1.0 - np.clip(rho.values, 0.0, 1.0)) * GRAY_WHITE)
    return np.flipud(rho.grid.scatter(gray, fill=GRAY_WHITE)).astype(np.int32)


def write_density_image(rho: ScalarField, path: Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    try:
        Image.fromarray(density_gray_levels(rho)).save(path, format="PPM")
    except OSError:
        raise OutputWriteError(path=str(path))
    return path


def write_density_field(rho: ScalarField, stem: Path) -> tuple[Path, Path]:
    """Write ``<stem>.txt`` and ``<stem>.pgm`` for one density snapshot."""
    stem = Path(stem)
    text = write_scalar_field(rho, stem.with_suffix(".txt"))
    image = write_density_image(rho, stem.with_suffix(".pgm"))
    logger.debug(f"Density snapshot written to {text} and {image}")
    return text, image


def read_lattice(path: Path, nx: int, ny: int) -> np.ndarray:
    """Read a text matrix into a ``(ny, nx)`` lattice indexed ``[j, i]``."""
    path = Path(path)
    try:
        matrix = np.atleast_2d(np.loadtxt(path, dtype=float))
    except (OSError, ValueError) as exc:
        raise DensityFileError(path=str(path), detail=str(exc))
    if matrix.shape != (ny, nx):
        raise DensityFileError(
            path=str(path), detail=f"expected {ny} rows of {nx} values, got {matrix.shape}"
        )
    return np.flipud(matrix)


def read_mask(path: Path, nx: int, ny: int) -> np.ndarray:
    lattice = read_lattice(path, nx, ny)
    if not np.all(np.isin(lattice, (0.0, 1.0))):
        raise DensityFileError(path=str(path), detail="mask entries must be 0 or 1")
    return lattice.astype(bool)


def density_from_lattice(lattice: np.ndarray, grid: CartesianGrid, source: str) -> ScalarField:
    """Validate a ``(ny, nx)`` lattice indexed ``[j, i]`` against ``grid``."""
    if lattice.shape != (grid.ny, grid.nx):
        raise DensityFileError(
            path=source, detail=f"expected {grid.ny} rows of {grid.nx} values, got {lattice.shape}"
        )
    if not np.array_equal(np.isnan(lattice), ~grid.active_mask):
        raise DensityFileError(path=source, detail="nan entries do not match the active mask")
    values = grid.gather(lattice)
    if values.min() < 0.0 or values.max() > 1.0:
        raise DensityFileError(path=source, detail="densities must lie in [0, 1]")
    return ScalarField(grid, values)


def read_density_field(path: Path, grid: CartesianGrid) -> ScalarField:
    return density_from_lattice(read_lattice(path, grid.nx, grid.ny), grid, str(path))


def write_tensor_table(field: NodalTensorField, path: Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    nodes = np.flatnonzero(field.grid.active_nodes)
    coordinates = field.grid.node_coordinates[nodes]
    table = np.column_stack((nodes, coordinates, field.values[nodes]))
    try:
        np.savetxt(
            path, table, fmt=["%d", "%g", "%g", "%.12g", "%.12g", "%.12g"], delimiter="\t",
            header="node\tx\ty\tsxx\tsyy\ttxy", comments="",
        )
    except OSError:
        raise OutputWriteError(path=str(path))
    return path


def write_principal_table(field: NodalTensorField, path: Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    nodes = np.flatnonzero(field.grid.active_nodes)
    principal = principal_arrays(field.values[nodes])
    table = np.column_stack(
        (
            nodes,
            field.grid.node_coordinates[nodes],
            principal["sigma1"],
            principal["sigma2"],
            principal["angle"],
            principal["isotropic"].astype(int),
        )
    )
    try:
        np.savetxt(
            path, table, fmt=["%d", "%g", "%g", "%.12g", "%.12g", "%.6f", "%d"], delimiter="\t",
            header="node\tx\ty\tsigma1\tsigma2\tmajor_angle\tisotropic", comments="",
        )
    except OSError:
        raise OutputWriteError(path=str(path))
    return path


def emit_sensitivity_diagnostics(
    state: OptimizationState, grid: CartesianGrid, directory: Path
) -> list[Path]:
    """Write ``dc_drho``, ``dg_drho`` and their negated ratio as field files."""
    sensitivities = state.sensitivities
    if sensitivities is None:
        logger.warning("No sensitivities available, diagnostics skipped")
        return []
    directory = Path(directory)
    written = [
        write_scalar_field(ScalarField(grid, values), directory / f"{name}.txt")
        for name, values in (
            ("dc_drho", sensitivities.dc_drho),
            ("dg_drho", sensitivities.dg_drho),
            ("ratio", sensitivities.ratio),
        )
    ]
    logger.info(f"Sensitivity diagnostics written for iteration {state.iteration}")
    return written
