"""Long optimisation runs on the shipped configurations, deselected by default."""

from pathlib import Path

import pytest

from stressinfill.controllers.pipeline import HISTORY_FILE, PipelineController
from stressinfill.io.config import load_config, with_overrides
from stressinfill.models.config import RunConfig
from stressinfill.models.optimization import InitMode

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

pytestmark = [pytest.mark.slow, pytest.mark.asyncio]


def _config(name: str, directory: Path, init: InitMode) -> RunConfig:
    return with_overrides(
        load_config(CONFIGS / name), init=init, single_thread=True, directory=str(directory)
    )


async def _compare_initialisations(
    controller: PipelineController, name: str, tmp_path: Path
) -> tuple:
    guided = await controller.optimize(_config(name, tmp_path / "topo", InitMode.TOPO))
    uniform = await controller.optimize(_config(name, tmp_path / "uniform", InitMode.UNIFORM))
    return guided, uniform


async def test_scaled_cantilever_guided_init_is_sharper(
    pipeline_controller: PipelineController, tmp_path: Path
) -> None:
    # Act
    guided, uniform = await _compare_initialisations(
        pipeline_controller, "cantilever_small.yaml", tmp_path
    )

    # Assert
    assert guided.analysis.skeleton.trisectors
    assert len(guided.history) == len(uniform.history) == 400
    assert guided.history[-1].sharpness < uniform.history[-1].sharpness


async def test_scaled_cantilever_history_is_reproducible(
    pipeline_controller: PipelineController, tmp_path: Path
) -> None:
    # Act
    first = await pipeline_controller.optimize(
        _config("cantilever_small.yaml", tmp_path / "first", InitMode.TOPO)
    )
    second = await pipeline_controller.optimize(
        _config("cantilever_small.yaml", tmp_path / "second", InitMode.TOPO)
    )

    # Assert
    assert (first.directory / HISTORY_FILE).read_bytes() == (
        second.directory / HISTORY_FILE
    ).read_bytes()


async def test_full_cantilever_guided_init_is_sharper(
    pipeline_controller: PipelineController, tmp_path: Path
) -> None:
    # Act
    guided, uniform = await _compare_initialisations(pipeline_controller, "cantilever.yaml", tmp_path)

    # Assert
    assert guided.history[-1].sharpness < uniform.history[-1].sharpness


async def test_four_corners_guided_init_is_sharper(
    pipeline_controller: PipelineController, tmp_path: Path
) -> None:
    # Act
    guided, uniform = await _compare_initialisations(pipeline_controller, "four_corners.yaml", tmp_path)

    # Assert
    assert len(guided.analysis.skeleton.trisectors) == 2
    assert all(record.g_global is not None for record in guided.history)
    assert guided.history[-1].mean_density == pytest.approx(0.378, abs=0.03)
    assert guided.history[-1].sharpness < uniform.history[-1].sharpness
