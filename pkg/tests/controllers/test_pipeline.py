import math
import threading
from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from stressinfill.controllers.pipeline import (
    DEGENERATE_POINTS_FILE,
    HISTORY_FILE,
    SKELETON_FILE,
    PipelineController,
)
from stressinfill.io.artifacts import read_history
from stressinfill.io.config import load_config, with_overrides
from stressinfill.models.config import RunConfig
from stressinfill.models.error import DensityFileError
from stressinfill.models.optimization import InitMode
from stressinfill.settings import Settings

CONFIGS = Path(__file__).resolve().parents[2] / "configs"

ANALYSIS_FILES = [
    "config.yaml",
    "run.log",
    "stress_tensors.tsv",
    "principal_stresses.tsv",
    "anisotropy.txt",
    DEGENERATE_POINTS_FILE,
    SKELETON_FILE,
]


def _with_snapshots(config: RunConfig, period: int) -> RunConfig:
    return config.model_copy(
        update={"output": config.output.model_copy(update={"snapshot_period": period})}
    )


@pytest.mark.asyncio
async def test_optimize_writes_run_directory(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = _with_snapshots(config_factory(), 2)

    # Act
    outcome = await pipeline_controller.optimize(config)

    # Assert
    directory = outcome.directory
    expected = ANALYSIS_FILES + [
        HISTORY_FILE,
        "init_density.txt",
        "init_density.pgm",
        "final_density.txt",
        "final_density.pgm",
        "density_00002.txt",
        "dc_drho.txt",
        "dg_drho.txt",
        "ratio.txt",
    ]
    assert all((directory / name).is_file() for name in expected)
    assert not (directory / "density_00001.txt").exists()
    written = read_history(directory / HISTORY_FILE)
    assert [r.iteration for r in written] == [r.iteration for r in outcome.history]
    assert written[-1].compliance == pytest.approx(outcome.history[-1].compliance, rel=1e-11)
    assert len(outcome.history) == 3
    assert "Optimisation run in" in (directory / "run.log").read_text()


@pytest.mark.asyncio
async def test_optimize_without_iterations(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = config_factory(max_iterations=0)

    # Act
    outcome = await pipeline_controller.optimize(config)

    # Assert
    assert outcome.history == []
    assert (outcome.directory / "init_density.txt").is_file()
    assert read_history(outcome.directory / HISTORY_FILE) == []
    assert not (outcome.directory / "final_density.txt").exists()


@pytest.mark.asyncio
async def test_topology_initialisation_is_solid_on_skeleton(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = config_factory()

    # Act
    phi = await pipeline_controller.initialize(config)
    uniform = await pipeline_controller.initialize(config_factory(init=InitMode.UNIFORM, directory="u"))

    # Assert
    assert set(np.unique(phi.values)) <= {0.6, 1.0}
    np.testing.assert_allclose(uniform.values, 0.6)


@pytest.mark.asyncio
async def test_metrics_reproduce_last_history_row(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = config_factory()
    outcome = await pipeline_controller.optimize(config)

    # Act
    metrics = await pipeline_controller.metrics(config, outcome.directory / "final_density.txt")

    # Assert
    last = outcome.history[-1]
    assert metrics.compliance == pytest.approx(last.compliance, rel=1e-6)
    assert metrics.mean_density == pytest.approx(last.mean_density, rel=1e-6)
    assert metrics.sharpness == pytest.approx(last.sharpness, rel=1e-6)
    assert metrics.g_local == pytest.approx(last.g_local, rel=1e-6, abs=1e-8)


@pytest.mark.asyncio
async def test_metrics_of_solid_design(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig],
    tmp_path: Path,
) -> None:
    # Prepare
    config = config_factory()
    density = tmp_path / "solid.txt"
    np.savetxt(density, np.ones((12, 24)))
    analysis = await pipeline_controller.run_analysis(config)

    # Act
    metrics = await pipeline_controller.metrics(config, density)

    # Assert
    assert metrics.compliance == pytest.approx(analysis.compliance, rel=1e-9)
    assert metrics.g_local == pytest.approx(1.0 / 0.6 - 1.0, rel=1e-9)
    assert metrics.sharpness == 0.0
    assert metrics.mean_density == 1.0
    assert metrics.g_global is None


@pytest.mark.asyncio
async def test_metrics_for_lattice(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = config_factory()
    rows = [[1.0] * 24 for _ in range(12)]

    # Act
    metrics = await pipeline_controller.metrics_for_lattice(config, rows)

    # Assert
    assert metrics.mean_density == 1.0
    with pytest.raises(DensityFileError):
        await pipeline_controller.metrics_for_lattice(config, [[1.0] * 24, [1.0] * 23])
    with pytest.raises(DensityFileError):
        await pipeline_controller.metrics_for_lattice(config, rows[:-1])


@pytest.mark.asyncio
async def test_compare_runs(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    first = await pipeline_controller.optimize(config_factory(directory="a"))
    second = await pipeline_controller.optimize(config_factory(directory="b", max_iterations=0))

    # Act
    same = await pipeline_controller.compare(first.directory, first.directory)
    mixed = await pipeline_controller.compare(first.directory, second.directory)

    # Assert
    assert (same.common_iterations, same.first_sharper) == (3, 0)
    assert same.first.iterations == 3
    assert same.first.final.compliance == pytest.approx(first.history[-1].compliance, rel=1e-11)
    assert mixed.common_iterations == 0
    assert mixed.second.iterations == 0 and mixed.second.final is None


@pytest.mark.asyncio
async def test_uniform_tension_has_empty_skeleton(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig],
    uniaxial_yaml: str,
) -> None:
    # Prepare
    config = config_factory(uniaxial_yaml)

    # Act
    analysis = await pipeline_controller.analyze(config)

    # Assert
    directory = pipeline_controller.output_directory(config)
    assert analysis.skeleton.is_empty()
    assert all((directory / name).is_file() for name in ANALYSIS_FILES)
    assert (directory / SKELETON_FILE).read_text() == ""
    assert len((directory / DEGENERATE_POINTS_FILE).read_text().splitlines()) == 1


def test_output_directory_falls_back_to_settings(
    settings: Settings, config_factory: Callable[..., RunConfig]
) -> None:
    # Prepare
    config = config_factory()
    config = config.model_copy(update={"output": config.output.model_copy(update={"directory": None})})

    # Act
    directory = PipelineController(settings).output_directory(config)

    # Assert
    assert directory == Path(settings.output_root) / "latest"


@pytest.mark.asyncio
async def test_analysis_runs_off_the_event_loop(
    pipeline_controller: PipelineController, config_factory: Callable[..., RunConfig],
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    # Prepare
    threads = []
    solid_analysis = pipeline_controller._solid_analysis
    evaluate = pipeline_controller._evaluate

    def record_analysis(config: RunConfig):
        threads.append(threading.get_ident())
        return solid_analysis(config)

    def record_evaluate(*args):
        threads.append(threading.get_ident())
        return evaluate(*args)

    monkeypatch.setattr(pipeline_controller, "_solid_analysis", record_analysis)
    monkeypatch.setattr(pipeline_controller, "_evaluate", record_evaluate)
    config = config_factory()

    # Act
    analysis = await pipeline_controller.run_analysis(config)
    metrics = await pipeline_controller.metrics_for_lattice(config, [[1.0] * 24] * 12)

    # Assert
    assert analysis.grid.nx == 24
    assert metrics.mean_density == 1.0
    assert len(threads) == 2
    assert threading.get_ident() not in threads


@pytest.mark.asyncio
async def test_scaled_cantilever_has_trisector_in_right_half(
    pipeline_controller: PipelineController,
) -> None:
    # Prepare
    config = with_overrides(load_config(CONFIGS / "cantilever_small.yaml"), single_thread=True)

    # Act
    analysis = await pipeline_controller.run_analysis(config)

    # Assert
    trisectors = analysis.skeleton.trisectors
    assert len(trisectors) >= 1
    assert any(point.x > config.grid.nx / 2 for point in trisectors)
    assert analysis.skeleton.separatrices


@pytest.mark.asyncio
async def test_four_corner_square_has_two_trisectors(
    pipeline_controller: PipelineController,
) -> None:
    # Prepare
    config = with_overrides(load_config(CONFIGS / "four_corners.yaml"), single_thread=True)

    # Act
    analysis = await pipeline_controller.run_analysis(config)

    # Assert
    assert len(analysis.skeleton.trisectors) == 2
    first, second = analysis.skeleton.trisectors
    assert (first.x + second.x) / 2 == pytest.approx(100.0, abs=1e-3)
    assert (first.y + second.y) / 2 == pytest.approx(100.0, abs=1e-3)
    assert all(
        math.hypot(point.x - 100.0, point.y - 100.0) < 100.0 for point in (first, second)
    )
