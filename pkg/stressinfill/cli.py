import asyncio
import sys
from contextlib import contextmanager
from functools import wraps
from pathlib import Path
from typing import Any, Awaitable, Callable, Iterator, TypeVar

import click
import uvicorn
from loguru import logger

from stressinfill.api import create_app
from stressinfill.controllers.pipeline import PipelineController
from stressinfill.io.config import load_config, with_overrides
from stressinfill.models.config import RunConfig
from stressinfill.models.error import BaseError
from stressinfill.models.optimization import InitMode
from stressinfill.settings import Settings

T = TypeVar("T")


@contextmanager
def _exit_on_error() -> Iterator[None]:
    """Turn domain errors into process exit statuses."""
    try:
        yield
    except BaseError as exc:
        click.echo(f"{exc.name}: {exc.message}", err=True)
        sys.exit(exc.exit_code)


def _run(awaitable: Awaitable[T]) -> T:
    with _exit_on_error():
        return asyncio.run(awaitable)


def run_options(command: Callable[..., Any]) -> Callable[..., Any]:
    options = [
        click.option(
            "--config", "config_path", required=True,
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="YAML run configuration.",
        ),
        click.option("--out", type=click.Path(file_okay=False), help="Output directory."),
        click.option("--max-iters", type=int, help="Override optimization.max_iterations."),
        click.option("--move-limit", type=float, help="Override optimization.move_limit."),
        click.option(
            "--init", type=click.Choice([mode.value for mode in InitMode]),
            help="Override optimization.init.",
        ),
        click.option("--single-thread", is_flag=True, help="Trace separatrices in one worker."),
    ]
    for option in reversed(options):
        command = option(command)

    @wraps(command)
    def wrapper(
        config_path: Path,
        out: str | None,
        max_iters: int | None,
        move_limit: float | None,
        init: str | None,
        single_thread: bool,
        **kwargs: Any,
    ) -> Any:
        with _exit_on_error():
            config = _load(config_path, out, max_iters, move_limit, init, single_thread)
        return command(config=config, **kwargs)

    return wrapper


def _load(
    config_path: Path,
    out: str | None,
    max_iters: int | None,
    move_limit: float | None,
    init: str | None,
    single_thread: bool,
) -> RunConfig:
    return with_overrides(
        load_config(config_path),
        max_iterations=max_iters,
        move_limit=move_limit,
        init=None if init is None else InitMode(init),
        single_thread=single_thread,
        directory=out,
    )


@click.group()
@click.pass_context
def cli(ctx: click.Context) -> None:
    """Porous infill optimisation guided by stress tensor topology."""
    settings = Settings()
    logger.remove()
    logger.add(lambda message: click.echo(message, err=True, nl=False), level=settings.log_level)
    ctx.obj = PipelineController(settings)


@cli.command()
@run_options
@click.pass_obj
def analyze(controller: PipelineController, config: RunConfig) -> None:
    """Solid-domain analysis and skeleton extraction."""
    analysis = _run(controller.analyze(config))
    skeleton = analysis.skeleton
    click.echo(
        f"{len(skeleton.points)} degenerate points ({len(skeleton.trisectors)} trisectors, "
        f"{len(skeleton.wedges)} wedges), {len(skeleton.separatrices)} separatrices"
    )


@cli.command(name="init")
@run_options
@click.pass_obj
def initialize(controller: PipelineController, config: RunConfig) -> None:
    """Analysis followed by the initial density design."""
    phi = _run(controller.initialize(config))
    click.echo(f"Initial design written, mean density {phi.mean():.4f}")


@cli.command()
@run_options
@click.pass_obj
def optimize(controller: PipelineController, config: RunConfig) -> None:
    """Full pipeline: analysis, initialisation and optimisation."""
    outcome = _run(controller.optimize(config))
    if not outcome.history:
        click.echo("No optimisation iterations run")
        return
    final = outcome.history[-1]
    click.echo(
        f"iterations {final.iteration} compliance {final.compliance:.6g} "
        f"sharpness {final.sharpness:.4e} mean density {final.mean_density:.4f}"
    )


@cli.command()
@run_options
@click.option(
    "--density", "density_path", required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Density matrix file to evaluate.",
)
@click.pass_obj
def metrics(controller: PipelineController, config: RunConfig, density_path: Path) -> None:
    """Compliance, constraints and sharpness of a density file."""
    result = _run(controller.metrics(config, density_path))
    click.echo(f"compliance {result.compliance:.12g}")
    click.echo(f"g_local {result.g_local:.12g}")
    if result.g_global is not None:
        click.echo(f"g_global {result.g_global:.12g}")
    click.echo(f"sharpness {result.sharpness:.12g}")
    click.echo(f"mean_density {result.mean_density:.12g}")


@cli.command()
@click.argument("first", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("second", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.pass_obj
def compare(controller: PipelineController, first: Path, second: Path) -> None:
    """Compare the histories of two optimisation runs."""
    comparison = _run(controller.compare(first, second))
    for summary in (comparison.first, comparison.second):
        final = summary.final
        if final is None:
            click.echo(f"{summary.directory}: no iterations")
            continue
        click.echo(
            f"{summary.directory}: iterations {summary.iterations} "
            f"compliance {final.compliance:.6g} mean density {final.mean_density:.4f} "
            f"sharpness {final.sharpness:.4e}"
        )
    click.echo(
        f"{comparison.first.directory} is sharper on {comparison.first_sharper} "
        f"of {comparison.common_iterations} common iterations"
    )


@cli.command()
@click.option("--host", help="Bind address, defaults to the api_host setting.")
@click.option("--port", type=int, help="Port, defaults to the api_port setting.")
@click.pass_obj
def serve(controller: PipelineController, host: str | None, port: int | None) -> None:
    """Serve the analysis and metrics endpoints."""
    settings = controller.settings
    uvicorn.run(create_app(), host=host or settings.api_host, port=port or settings.api_port)
