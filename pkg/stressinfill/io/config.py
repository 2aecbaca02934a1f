"""YAML run configuration: parsing with line-numbered errors, echo and setup."""

import math
from pathlib import Path
from typing import Any

import numpy as np
import yaml
from loguru import logger
from pydantic import ValidationError

from stressinfill.domain import CartesianGrid, build_grid, build_parameter_field
from stressinfill.io.fields import read_mask
from stressinfill.models.config import (
    CircleCutout,
    Edge,
    LoadSelector,
    LoadSpec,
    RunConfig,
    SupportSpec,
)
from stressinfill.models.error import BoundaryConditionError, ConfigurationError, OutputWriteError
from stressinfill.models.grid import BoundaryConditions, FixedDof, NodalLoad
from stressinfill.models.optimization import InitMode
from stressinfill.models.parameter import ParameterRole
from stressinfill.optimization.loop import OptimizationConfig

ECHO_FILE_NAME = "config.yaml"


def _line_of(node: yaml.Node, location: tuple[Any, ...]) -> int:
    """Line of the deepest YAML node reachable along a validation error location."""
    for key in location:
        child = None
        if isinstance(node, yaml.MappingNode):
            child = next((value for name, value in node.value if name.value == key), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            child = node.value[key]
        if child is None:
            break
        node = child
    return node.start_mark.line + 1


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigurationError(
            detail=f"malformed YAML: {problem}", line=None if mark is None else mark.line + 1
        )
    if not isinstance(data, dict) or root is None:
        raise ConfigurationError(detail="configuration must be a mapping of sections", line=1)

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        errors = exc.errors()
        for error in errors[1:]:
            location = ".".join(str(part) for part in error["loc"])
            logger.error(f"line {_line_of(root, error['loc'])}: {location}: {error['msg']}")
        first = errors[0]
        location = ".".join(str(part) for part in first["loc"]) or "config"
        line = _line_of(root, first["loc"])
        raise ConfigurationError(detail=f"{location}: {first['msg']}", line=line)

    mask_file = config.grid.mask_file
    if mask_file is not None and not Path(mask_file).is_absolute():
        resolved = ((base_dir or Path.cwd()) / mask_file).resolve()
        config = config.model_copy(
            update={"grid": config.grid.model_copy(update={"mask_file": str(resolved)})}
        )
    return config


def load_config(path: Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(detail=f"cannot read {path}: {exc.strerror}")
    config = parse_config(text, base_dir=path.parent)
    logger.info(f"Loaded configuration {path}")
    return config


def with_overrides(
    config: RunConfig,
    max_iterations: int | None = None,
    move_limit: float | None = None,
    init: InitMode | None = None,
    single_thread: bool | None = None,
    directory: str | None = None,
) -> RunConfig:
    """Apply command-line overrides and validate the result again."""
    data = config.model_dump(mode="json")
    updates = {
        "max_iterations": max_iterations,
        "move_limit": move_limit,
        "init": None if init is None else InitMode(init).value,
    }
    for key, value in updates.items():
        if value is not None:
            data["optimization"][key] = value
    if single_thread:
        data["single_thread"] = True
    if directory is not None:
        data["output"]["directory"] = directory
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigurationError(detail=f"{location}: {first['msg']}")


def echo_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def write_config_echo(config: RunConfig, directory: Path) -> Path:
    path = Path(directory) / ECHO_FILE_NAME
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(echo_config(config), encoding="utf-8")
    except OSError:
        raise OutputWriteError(path=str(path))
    return path


def _inside_box(x: np.ndarray, y: np.ndarray, box: list[float]) -> np.ndarray:
    x0, y0, x1, y1 = box
    return (x >= min(x0, x1)) & (x <= max(x0, x1)) & (y >= min(y0, y1)) & (y <= max(y0, y1))


def build_domain(config: RunConfig) -> CartesianGrid:
    section = config.grid
    nx, ny = section.nx, section.ny
    mask = np.ones((ny, nx), dtype=bool)
    if section.mask_file is not None:
        mask &= read_mask(Path(section.mask_file), nx, ny)
    x, y = np.meshgrid(np.arange(nx) + 0.5, np.arange(ny) + 0.5)
    for cutout in section.cutouts:
        if isinstance(cutout, CircleCutout):
            cx, cy, radius = cutout.circle
            mask &= np.hypot(x - cx, y - cy) > radius
        else:
            mask &= ~_inside_box(x, y, cutout.rectangle)
    return build_grid(nx, ny, None if mask.all() else mask)


def _support_nodes(grid: CartesianGrid, support: SupportSpec) -> list[int]:
    coordinates = grid.node_coordinates
    x, y = coordinates[:, 0], coordinates[:, 1]
    if support.edge is not None:
        selected = {
            Edge.LEFT: x == 0,
            Edge.RIGHT: x == grid.nx,
            Edge.BOTTOM: y == 0,
            Edge.TOP: y == grid.ny,
        }[support.edge]
    elif support.box is not None:
        selected = _inside_box(x, y, support.box)
    else:
        selected = np.zeros(grid.n_nodes, dtype=bool)
        selected[_nearest_node(grid, *support.node)] = True
    nodes = np.flatnonzero(selected & grid.active_nodes)
    if nodes.size == 0:
        selector = support.model_dump(mode="json", exclude_none=True)
        raise BoundaryConditionError(detail=f"support {selector} selects no active node")
    return nodes.tolist()


def _nearest_node(grid: CartesianGrid, x: float, y: float) -> int:
    i = min(max(int(round(x)), 0), grid.nx)
    j = min(max(int(round(y)), 0), grid.ny)
    return grid.node_index(i, j)


def _selector_point(grid: CartesianGrid, selector: LoadSelector) -> tuple[float, float]:
    nx, ny = grid.nx, grid.ny
    return {
        LoadSelector.LEFT_MID: (0.0, ny / 2),
        LoadSelector.RIGHT_MID: (float(nx), ny / 2),
        LoadSelector.TOP_MID: (nx / 2, float(ny)),
        LoadSelector.BOTTOM_MID: (nx / 2, 0.0),
        LoadSelector.TOP_LEFT: (0.0, float(ny)),
        LoadSelector.TOP_RIGHT: (float(nx), float(ny)),
        LoadSelector.BOTTOM_LEFT: (0.0, 0.0),
        LoadSelector.BOTTOM_RIGHT: (float(nx), 0.0),
        LoadSelector.CENTER: (nx / 2, ny / 2),
    }[selector]


def _load_nodes(grid: CartesianGrid, load: LoadSpec) -> list[int]:
    """Nodes sharing a load: a half-integer selector coordinate splits it in two."""
    if not isinstance(load.at, LoadSelector):
        return [_nearest_node(grid, *load.at)]
    x, y = _selector_point(grid, load.at)
    columns = sorted({math.floor(x), math.ceil(x)})
    rows = sorted({math.floor(y), math.ceil(y)})
    return [grid.node_index(i, j) for j in rows for i in columns]


def build_boundary_conditions(config: RunConfig, grid: CartesianGrid) -> BoundaryConditions:
    fixed: dict[int, FixedDof] = {}
    for support in config.supports:
        for node in _support_nodes(grid, support):
            for direction in support.directions:
                dof = FixedDof(node=node, direction=direction)
                fixed[dof.dof] = dof
    loads = []
    for load in config.loads:
        nodes = _load_nodes(grid, load)
        share = 1.0 / len(nodes)
        loads.extend(NodalLoad(node=node, fx=share * load.fx, fy=share * load.fy) for node in nodes)
    try:
        bc = BoundaryConditions(fixed_dofs=[fixed[dof] for dof in sorted(fixed)], loads=loads)
    except ValidationError as exc:
        raise BoundaryConditionError(detail=exc.errors()[0]["msg"])
    logger.info(f"Boundary conditions: {len(bc.fixed_dofs)} fixed dofs, {len(bc.loads)} nodal loads")
    return bc


def build_optimization_config(
    config: RunConfig, grid: CartesianGrid, log_period: int = 10
) -> OptimizationConfig:
    section = config.optimization
    return OptimizationConfig(
        alpha=build_parameter_field(grid, section.alpha, ParameterRole.ALPHA),
        R=build_parameter_field(grid, section.R, ParameterRole.RADIUS),
        r=section.r,
        max_iterations=section.max_iterations,
        alpha_total=section.alpha_total,
        p=section.p,
        beta=section.beta,
        move_limit=section.move_limit,
        material=config.material,
        init=section.init,
        mma=section.mma,
        solver=config.solver,
        log_period=log_period,
    )
