"""Porous-infill compliance minimisation driven by MMA.

Each iteration updates the design variables from the sensitivities of the
previous design, then filters, projects and analyses the new design. History
row ``k`` therefore describes the design produced by update ``k``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from loguru import logger

from stressinfill.domain import CartesianGrid, NeighborhoodTable, ScalarField, build_neighborhoods
from stressinfill.fem import (
    DisplacementField,
    assemble_and_solve,
    compliance,
    simp_modulus_derivative,
    unit_strain_energies,
)
from stressinfill.models.error import DegenerateConstraintError, ParameterRangeError
from stressinfill.models.grid import BoundaryConditions
from stressinfill.models.material import MaterialModel, SolverSettings
from stressinfill.models.optimization import BetaSchedule, HistoryRecord, InitMode, MmaSettings
from stressinfill.optimization.constraints import (
    aggregate_constraint,
    constraint_sensitivity,
    global_constraint,
    global_constraint_sensitivity,
    local_volume,
)
from stressinfill.optimization.filtering import (
    DensityFilter,
    heaviside_derivative,
    heaviside_project,
)
from stressinfill.optimization.mma import MmaWorkspace, mma_update

RATIO_FLOOR = 1.0e-300


@dataclass(frozen=True, eq=False)
class OptimizationConfig:
    alpha: ScalarField
    R: ScalarField
    r: float
    max_iterations: int
    alpha_total: float | None = None
    p: float = 16.0
    beta: BetaSchedule = field(default_factory=BetaSchedule)
    move_limit: float = 0.01
    material: MaterialModel = field(default_factory=MaterialModel)
    init: InitMode = InitMode.TOPO
    mma: MmaSettings = field(default_factory=MmaSettings)
    solver: SolverSettings = field(default_factory=SolverSettings)
    log_period: int = 10

    def __post_init__(self) -> None:
        if not self.r < self.R.min():
            raise ParameterRangeError(
                parameter="r", value=self.r, allowed=f"(0, min R = {self.R.min()}) since r < R"
            )
        if self.p < 1.0:
            raise ParameterRangeError(parameter="p", value=self.p, allowed="[1, inf)")
        if not 0.0 < self.move_limit <= 1.0:
            raise ParameterRangeError(parameter="move_limit", value=self.move_limit, allowed="(0, 1]")
        if self.alpha_total is not None and not 0.0 < self.alpha_total < 1.0:
            raise ParameterRangeError(parameter="alpha_total", value=self.alpha_total, allowed="(0, 1)")
        if self.max_iterations < 0:
            raise ParameterRangeError(
                parameter="max_iterations", value=self.max_iterations, allowed="[0, inf)"
            )

    @property
    def constraint_count(self) -> int:
        return 1 if self.alpha_total is None else 2


@dataclass(frozen=True, eq=False)
class SensitivityFields:
    dc_drho: np.ndarray
    dg_drho: np.ndarray
    dc_dphi: np.ndarray
    dg_dphi: np.ndarray
    dg_global_dphi: np.ndarray | None = None

    @property
    def ratio(self) -> np.ndarray:
        """``-dc/drho / dg/drho``, zero where the constraint sensitivity vanishes."""
        defined = self.dg_drho > RATIO_FLOOR
        safe = np.where(defined, self.dg_drho, 1.0)
        return np.where(defined, -self.dc_drho / safe, 0.0)


@dataclass
class OptimizationState:
    iteration: int
    phi: np.ndarray
    phi_filtered: np.ndarray
    rho: np.ndarray
    beta: float
    history: list[HistoryRecord] = field(default_factory=list)
    displacement: DisplacementField | None = None
    compliance: float | None = None
    g_local: float | None = None
    g_global: float | None = None
    sensitivities: SensitivityFields | None = None


@dataclass(frozen=True)
class DesignMetrics:
    compliance: float
    g_local: float
    g_global: float | None
    sharpness: float
    mean_density: float


def sharpness(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    return 4.0 * float(np.mean(rho * (1.0 - rho)))


def compliance_sensitivity(
    U: DisplacementField, rho: np.ndarray, mat: MaterialModel
) -> np.ndarray:
    return -0.5 * simp_modulus_derivative(np.asarray(rho), mat) * unit_strain_energies(U, mat)


def chain_to_design(
    dX_drho: np.ndarray, phi_filtered: np.ndarray, beta: float, density_filter: DensityFilter
) -> np.ndarray:
    return density_filter.adjoint(np.asarray(dX_drho) * heaviside_derivative(phi_filtered, beta))


def evaluate_design(
    grid: CartesianGrid,
    rho: np.ndarray,
    bc: BoundaryConditions,
    cfg: OptimizationConfig,
    nb: NeighborhoodTable | None = None,
) -> DesignMetrics:
    """Compliance, constraints and sharpness of a given density field."""
    nb = nb or build_neighborhoods(grid, cfg.R)
    U, _ = assemble_and_solve(grid, ScalarField(grid, np.asarray(rho, dtype=float)), bc, cfg.material, cfg.solver)
    return DesignMetrics(
        compliance=compliance(U, bc),
        g_local=aggregate_constraint(local_volume(rho, nb), cfg.alpha.values, cfg.p),
        g_global=None if cfg.alpha_total is None else global_constraint(rho, cfg.alpha_total),
        sharpness=sharpness(rho),
        mean_density=float(np.mean(rho)),
    )


class _Evaluator:
    def __init__(
        self, grid: CartesianGrid, bc: BoundaryConditions, cfg: OptimizationConfig
    ) -> None:
        self.grid = grid
        self.bc = bc
        self.cfg = cfg
        self.filter = DensityFilter.build(grid, cfg.r)
        self.neighborhoods = build_neighborhoods(grid, cfg.R)

    def project(self, phi: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
        phi_filtered = np.clip(self.filter.apply(phi), 0.0, 1.0)
        return phi_filtered, heaviside_project(phi_filtered, beta)

    def analyse(self, state: OptimizationState) -> None:
        cfg = self.cfg
        U, _ = assemble_and_solve(
            self.grid, ScalarField(self.grid, state.rho), self.bc, cfg.material, cfg.solver,
            initial_guess=state.displacement,
        )
        rho_bar = local_volume(state.rho, self.neighborhoods)
        dc_drho = compliance_sensitivity(U, state.rho, cfg.material)
        dg_drho = constraint_sensitivity(rho_bar, cfg.alpha.values, cfg.p, self.neighborhoods)
        dg_dphi = chain_to_design(dg_drho, state.phi_filtered, state.beta, self.filter)
        if not np.any(dg_dphi != 0.0):
            raise DegenerateConstraintError(iteration=state.iteration)
        dg_global_dphi = None
        state.g_global = None
        if cfg.alpha_total is not None:
            state.g_global = global_constraint(state.rho, cfg.alpha_total)
            dg_global_dphi = chain_to_design(
                global_constraint_sensitivity(state.rho), state.phi_filtered, state.beta, self.filter
            )
        state.displacement = U
        state.compliance = compliance(U, self.bc)
        state.g_local = aggregate_constraint(rho_bar, cfg.alpha.values, cfg.p)
        state.sensitivities = SensitivityFields(
            dc_drho=dc_drho,
            dg_drho=dg_drho,
            dc_dphi=chain_to_design(dc_drho, state.phi_filtered, state.beta, self.filter),
            dg_dphi=dg_dphi,
            dg_global_dphi=dg_global_dphi,
        )


def run_optimization(
    cfg: OptimizationConfig,
    grid: CartesianGrid,
    bc: BoundaryConditions,
    phi_init: ScalarField | None = None,
    on_iteration: Callable[[OptimizationState], None] | None = None,
) -> tuple[OptimizationState, list[HistoryRecord]]:
    evaluator = _Evaluator(grid, bc, cfg)
    phi = np.clip(cfg.alpha.values if phi_init is None else phi_init.values, 0.0, 1.0).astype(float)
    beta = cfg.beta.at(1)
    phi_filtered, rho = evaluator.project(phi, beta)
    state = OptimizationState(iteration=0, phi=phi, phi_filtered=phi_filtered, rho=rho, beta=beta)
    if cfg.max_iterations == 0:
        logger.info("No optimisation iterations requested")
        return state, state.history

    evaluator.analyse(state)
    reference = state.compliance if state.compliance and state.compliance > 0.0 else 1.0
    logger.info(f"Initial design: compliance {state.compliance:.6g}, g_local {state.g_local:.4g}")
    workspace = MmaWorkspace(
        n=grid.n_elements, m=cfg.constraint_count, move_limit=cfg.move_limit, settings=cfg.mma
    )

    for iteration in range(1, cfg.max_iterations + 1):
        sens = state.sensitivities
        values = [state.g_local]
        grads = [sens.dg_dphi]
        if cfg.alpha_total is not None:
            values.append(state.g_global)
            grads.append(sens.dg_global_dphi)
        phi = mma_update(state.phi, sens.dc_dphi / reference, np.array(values), np.array(grads), workspace)

        state.iteration = iteration
        state.beta = cfg.beta.at(iteration)
        state.phi = phi
        state.phi_filtered, state.rho = evaluator.project(phi, state.beta)
        evaluator.analyse(state)
        record = HistoryRecord(
            iteration=iteration,
            beta=state.beta,
            compliance=state.compliance,
            g_local=state.g_local,
            g_global=state.g_global,
            sharpness=sharpness(state.rho),
            mean_density=float(np.mean(state.rho)),
        )
        state.history.append(record)
        if not record.is_finite():
            logger.warning(f"Non-finite history values at iteration {iteration}")
        if iteration % cfg.log_period == 0 or iteration == cfg.max_iterations:
            logger.info(
                f"it {iteration:5d} beta {record.beta:6.1f} c {record.compliance:.6g} "
                f"g {record.g_local:+.4e} s {record.sharpness:.4e} mean {record.mean_density:.4f}"
            )
        if on_iteration is not None:
            on_iteration(state)

    return state, state.history

