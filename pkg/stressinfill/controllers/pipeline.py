"""The four pipeline steps: solid analysis, skeleton extraction, initialisation, optimisation."""

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from time import perf_counter
from typing import Iterator

import numpy as np
from loguru import logger
from starlette.concurrency import run_in_threadpool

from stressinfill.domain import CartesianGrid, ScalarField
from stressinfill.fem import DisplacementField, assemble_and_solve, compliance
from stressinfill.io.artifacts import (
    read_history,
    write_degenerate_points,
    write_history,
    write_psl_field,
    write_skeleton,
)
from stressinfill.io.config import (
    build_boundary_conditions,
    build_domain,
    build_optimization_config,
    write_config_echo,
)
from stressinfill.io.fields import (
    density_from_lattice,
    emit_sensitivity_diagnostics,
    read_density_field,
    write_density_field,
    write_principal_table,
    write_scalar_field,
    write_tensor_table,
)
from stressinfill.models.config import RunConfig
from stressinfill.models.error import BaseError, DensityFileError, OutputWriteError
from stressinfill.models.grid import BoundaryConditions
from stressinfill.models.material import LinearSystemSummary
from stressinfill.models.optimization import HistoryRecord, InitMode
from stressinfill.models.view import RunComparison, RunSummary
from stressinfill.optimization.initialization import skeleton_initialization
from stressinfill.optimization.loop import (
    DesignMetrics,
    OptimizationState,
    evaluate_design,
    run_optimization,
)
from stressinfill.settings import Settings
from stressinfill.stress import NodalTensorField, recover_nodal_stress
from stressinfill.topology import (
    PrincipalStressLine,
    TopologicalSkeleton,
    extract_skeleton,
    trace_psl_field,
)

HISTORY_FILE = "history.csv"
DEGENERATE_POINTS_FILE = "degenerate_points.tsv"
SKELETON_FILE = "skeleton.psl"
PSL_FIELD_FILE = "psl_field.psl"
TENSOR_FILE = "stress_tensors.tsv"
PRINCIPAL_FILE = "principal_stresses.tsv"
ANISOTROPY_FILE = "anisotropy.txt"
INIT_DENSITY_STEM = "init_density"
FINAL_DENSITY_STEM = "final_density"


@dataclass(frozen=True, eq=False)
class AnalysisResult:
    grid: CartesianGrid
    bc: BoundaryConditions
    displacement: DisplacementField
    summary: LinearSystemSummary
    compliance: float
    stress: NodalTensorField
    skeleton: TopologicalSkeleton
    psl_field: list[PrincipalStressLine] | None = None


@dataclass(frozen=True, eq=False)
class OptimizationOutcome:
    directory: Path
    analysis: AnalysisResult
    phi_init: ScalarField
    state: OptimizationState
    history: list[HistoryRecord]


class PipelineController:
    def __init__(self, settings: Settings) -> None:
        self.settings = settings

    def output_directory(self, config: RunConfig) -> Path:
        if config.output.directory is not None:
            return Path(config.output.directory)
        return Path(self.settings.output_root) / "latest"

    def _n_jobs(self, config: RunConfig) -> int:
        return 1 if config.single_thread else self.settings.n_jobs

    @contextmanager
    def _run_log(self, directory: Path) -> Iterator[None]:
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError:
            raise OutputWriteError(path=str(directory))
        sink = logger.add(
            directory / self.settings.log_file_name, level=self.settings.log_level, mode="w"
        )
        try:
            yield
        except BaseError as exc:
            logger.error(f"{exc.name}: {exc.message}")
            raise
        finally:
            logger.remove(sink)

    @contextmanager
    def _timed(self, step: str) -> Iterator[None]:
        start = perf_counter()
        yield
        logger.info(f"{step} finished in {perf_counter() - start:.2f} s")

    def _solid_analysis(
        self, config: RunConfig, grid: CartesianGrid | None = None
    ) -> AnalysisResult:
        n_jobs = self._n_jobs(config)
        with self._timed("Solid-domain analysis"):
            grid = grid or build_domain(config)
            bc = build_boundary_conditions(config, grid)
            U, summary = assemble_and_solve(
                grid, ScalarField.constant(grid, 1.0), bc, config.material, config.solver
            )
            stress = recover_nodal_stress(grid, U, config.material)
        with self._timed("Skeleton extraction"):
            skeleton = extract_skeleton(stress, config.tracing, n_jobs=n_jobs)
            psl_field = None
            if config.tracing.psl_spacing is not None:
                stops = np.array([p.position for p in skeleton.points]).reshape(-1, 2)
                psl_field = trace_psl_field(
                    stress, config.tracing.psl_spacing, config.tracing, stops, n_jobs=n_jobs
                )
        return AnalysisResult(
            grid=grid,
            bc=bc,
            displacement=U,
            summary=summary,
            compliance=compliance(U, bc),
            stress=stress,
            skeleton=skeleton,
            psl_field=psl_field,
        )

    def _write_analysis(self, analysis: AnalysisResult, directory: Path) -> None:
        write_tensor_table(analysis.stress, directory / TENSOR_FILE)
        write_principal_table(analysis.stress, directory / PRINCIPAL_FILE)
        write_scalar_field(
            ScalarField(analysis.grid, analysis.stress.anisotropy()), directory / ANISOTROPY_FILE
        )
        write_degenerate_points(analysis.skeleton, directory / DEGENERATE_POINTS_FILE)
        write_skeleton(analysis.skeleton, directory / SKELETON_FILE)
        if analysis.psl_field is not None:
            write_psl_field(analysis.psl_field, directory / PSL_FIELD_FILE)

    def _initial_design(
        self, config: RunConfig, analysis: AnalysisResult, alpha: ScalarField
    ) -> ScalarField:
        if config.optimization.init is InitMode.UNIFORM:
            logger.info("Uniform initialisation at alpha")
            return alpha
        return skeleton_initialization(analysis.skeleton, analysis.grid, alpha)

    async def run_analysis(self, config: RunConfig) -> AnalysisResult:
        """Steps 1 and 2 in memory, nothing written, off the event loop."""
        return await run_in_threadpool(self._solid_analysis, config)

    async def analyze(self, config: RunConfig) -> AnalysisResult:
        directory = self.output_directory(config)
        with self._run_log(directory):
            logger.info(f"Analysis run in {directory}")
            write_config_echo(config, directory)
            analysis = self._solid_analysis(config)
            self._write_analysis(analysis, directory)
        return analysis

    async def initialize(self, config: RunConfig) -> ScalarField:
        directory = self.output_directory(config)
        with self._run_log(directory):
            logger.info(f"Initialisation run in {directory}")
            write_config_echo(config, directory)
            grid = build_domain(config)
            cfg = build_optimization_config(config, grid, self.settings.log_period)
            analysis = self._solid_analysis(config, grid)
            self._write_analysis(analysis, directory)
            with self._timed("Initialisation"):
                phi_init = self._initial_design(config, analysis, cfg.alpha)
                write_density_field(phi_init, directory / INIT_DENSITY_STEM)
        return phi_init

    async def optimize(self, config: RunConfig) -> OptimizationOutcome:
        directory = self.output_directory(config)
        with self._run_log(directory):
            logger.info(f"Optimisation run in {directory}")
            write_config_echo(config, directory)
            grid = build_domain(config)
            cfg = build_optimization_config(config, grid, self.settings.log_period)
            analysis = self._solid_analysis(config, grid)
            self._write_analysis(analysis, directory)
            with self._timed("Initialisation"):
                phi_init = self._initial_design(config, analysis, cfg.alpha)
                write_density_field(phi_init, directory / INIT_DENSITY_STEM)

            period = config.output.snapshot_period

            def snapshot(state: OptimizationState) -> None:
                if period and state.iteration % period == 0:
                    write_density_field(
                        ScalarField(grid, state.rho), directory / f"density_{state.iteration:05d}"
                    )

            with self._timed("Optimisation"):
                state, history = run_optimization(
                    cfg, grid, analysis.bc, phi_init, on_iteration=snapshot
                )
            write_history(history, directory / HISTORY_FILE)
            if history:
                write_density_field(ScalarField(grid, state.rho), directory / FINAL_DENSITY_STEM)
                emit_sensitivity_diagnostics(state, grid, directory)
                final = history[-1]
                logger.info(
                    f"Final design: compliance {final.compliance:.6g}, "
                    f"sharpness {final.sharpness:.4e}, mean density {final.mean_density:.4f}"
                )
        return OptimizationOutcome(
            directory=directory,
            analysis=analysis,
            phi_init=phi_init,
            state=state,
            history=history,
        )

    def _evaluate(self, config: RunConfig, grid: CartesianGrid, rho: ScalarField) -> DesignMetrics:
        bc = build_boundary_conditions(config, grid)
        cfg = build_optimization_config(config, grid, self.settings.log_period)
        metrics = evaluate_design(grid, rho.values, bc, cfg)
        logger.info(
            f"Metrics: compliance {metrics.compliance:.6g}, g_local {metrics.g_local:.4e}, "
            f"sharpness {metrics.sharpness:.4e}, mean density {metrics.mean_density:.4f}"
        )
        return metrics

    async def metrics(self, config: RunConfig, density_path: Path) -> DesignMetrics:
        grid = build_domain(config)
        return self._evaluate(config, grid, read_density_field(Path(density_path), grid))

    async def metrics_for_lattice(
        self, config: RunConfig, rows: list[list[float | None]]
    ) -> DesignMetrics:
        """Metrics of a density given as rows, top row first, ``None`` where masked."""
        grid = build_domain(config)
        try:
            lattice = np.flipud(np.array(rows, dtype=float))
        except ValueError as exc:
            raise DensityFileError(path="request body", detail=str(exc))
        rho = density_from_lattice(lattice, grid, "request body")
        return await run_in_threadpool(self._evaluate, config, grid, rho)

    async def compare(self, first: Path, second: Path) -> RunComparison:
        directories = (Path(first), Path(second))
        histories = [read_history(directory / HISTORY_FILE) for directory in directories]
        first_rows, second_rows = ({r.iteration: r for r in h} for h in histories)
        common = sorted(first_rows.keys() & second_rows.keys())
        first_sharper = sum(first_rows[k].sharpness < second_rows[k].sharpness for k in common)
        summaries = [
            RunSummary(
                directory=str(directory),
                iterations=len(history),
                final=history[-1] if history else None,
            )
            for directory, history in zip(directories, histories)
        ]
        logger.info(
            f"Compared {len(common)} common iterations: {first_sharper} sharper in {directories[0]}"
        )
        return RunComparison(
            first=summaries[0],
            second=summaries[1],
            common_iterations=len(common),
            first_sharper=first_sharper,
        )
