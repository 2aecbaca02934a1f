from pathlib import Path
from typing import Callable

import numpy as np
import pytest
from faker import Faker
from fastapi import FastAPI
from starlette.testclient import TestClient

from stressinfill.api import create_app
from stressinfill.controllers.pipeline import PipelineController
from stressinfill.domain import CartesianGrid, build_grid
from stressinfill.io.config import parse_config
from stressinfill.models.config import RunConfig
from stressinfill.models.grid import BoundaryConditions, Direction, FixedDof, NodalLoad
from stressinfill.models.material import MaterialModel
from stressinfill.settings import Settings

CANTILEVER_YAML = """\
grid:
  nx: 24
  ny: 12
supports:
  - edge: left
loads:
  - at: right-mid
    fy: -1.0
optimization:
  alpha: 0.6
  R: 3
  r: 1.5
  move_limit: 0.1
  max_iterations: 3
  init: topo
"""

UNIAXIAL_YAML = """\
grid:
  nx: 8
  ny: 4
supports:
  - edge: left
    directions: [x]
  - node: [0, 0]
    directions: [y]
loads:
  - at: [8, 0]
    fx: 0.5
  - at: [8, 1]
    fx: 1.0
  - at: [8, 2]
    fx: 1.0
  - at: [8, 3]
    fx: 1.0
  - at: [8, 4]
    fx: 0.5
optimization:
  alpha: 0.6
  R: 2
  r: 1.2
  max_iterations: 2
  init: uniform
"""


@pytest.fixture(name="faker")
def get_faker() -> Faker:
    faker = Faker("fr_FR")
    faker.seed_instance(20240607)
    return faker


@pytest.fixture(name="rng")
def get_rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture(name="material")
def get_material() -> MaterialModel:
    return MaterialModel()


@pytest.fixture(name="small_grid")
def get_small_grid() -> CartesianGrid:
    return build_grid(12, 8)


@pytest.fixture(name="cantilever_bc")
def get_cantilever_bc(small_grid: CartesianGrid) -> BoundaryConditions:
    fixed = [
        FixedDof(node=small_grid.node_index(0, j), direction=direction)
        for j in range(small_grid.ny + 1)
        for direction in (Direction.X, Direction.Y)
    ]
    load = NodalLoad(node=small_grid.node_index(small_grid.nx, small_grid.ny // 2), fy=-1.0)
    return BoundaryConditions(fixed_dofs=fixed, loads=[load])


@pytest.fixture(name="cantilever_yaml")
def get_cantilever_yaml() -> str:
    return CANTILEVER_YAML


@pytest.fixture(name="uniaxial_yaml")
def get_uniaxial_yaml() -> str:
    return UNIAXIAL_YAML


@pytest.fixture(name="config_factory")
def get_config_factory(tmp_path: Path) -> Callable[..., RunConfig]:
    def make(text: str = CANTILEVER_YAML, directory: str = "run", **updates) -> RunConfig:
        config = parse_config(text)
        optimization = config.optimization.model_copy(update=updates)
        output = config.output.model_copy(update={"directory": str(tmp_path / directory)})
        return config.model_copy(update={"optimization": optimization, "output": output})

    return make


@pytest.fixture(name="settings")
def get_settings(tmp_path: Path) -> Settings:
    return Settings(output_root=str(tmp_path / "runs"), n_jobs=1, log_level="DEBUG")


@pytest.fixture(name="pipeline_controller")
def get_pipeline_controller(settings: Settings) -> PipelineController:
    return PipelineController(settings)


@pytest.fixture(name="app")
def get_test_app() -> FastAPI:
    return create_app()


@pytest.fixture(name="client")
def get_test_client(app: FastAPI) -> TestClient:
    return TestClient(app)
