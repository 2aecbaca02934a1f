"""Bilinear quadrilateral finite elements on the unit-square grid."""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from loguru import logger

from stressinfill.domain import CartesianGrid, ScalarField
from stressinfill.models.error import (
    BoundaryConditionError,
    PoissonRatioError,
    SingularSystemError,
    SolverConvergenceError,
)
from stressinfill.models.grid import BoundaryConditions
from stressinfill.models.material import (
    LinearSystemSummary,
    MaterialModel,
    SolverKind,
    SolverSettings,
)

# Corner positions of the unit element, counter-clockwise from bottom-left.
CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class DisplacementField:
    grid: CartesianGrid
    values: np.ndarray

    @property
    def nodal(self) -> np.ndarray:
        """``(n_nodes, 2)`` view holding ``(ux, uy)`` per node."""
        return self.values.reshape(-1, 2)

    @property
    def element_vectors(self) -> np.ndarray:
        return self.values[self.grid.edof]

    def scaled(self, factor: float) -> "DisplacementField":
        return DisplacementField(self.grid, factor * self.values)


def element_stiffness_unit(nu: float) -> np.ndarray:
    """Plane-stress stiffness of a unit square with unit Young's modulus."""
    if not -1.0 < nu < 0.5:
        raise PoissonRatioError(nu=nu)
    k = np.array(
        [
            0.5 - nu / 6.0,
            0.125 + nu / 8.0,
            -0.25 - nu / 12.0,
            -0.125 + 3.0 * nu / 8.0,
            -0.25 + nu / 12.0,
            -0.125 - nu / 8.0,
            nu / 6.0,
            0.125 - 3.0 * nu / 8.0,
        ]
    )
    pattern = np.array(
        [
            [0, 1, 2, 3, 4, 5, 6, 7],
            [1, 0, 7, 6, 5, 4, 3, 2],
            [2, 7, 0, 5, 6, 3, 4, 1],
            [3, 6, 5, 0, 7, 2, 1, 4],
            [4, 5, 6, 7, 0, 1, 2, 3],
            [5, 4, 3, 2, 1, 0, 7, 6],
            [6, 3, 4, 1, 2, 7, 0, 5],
            [7, 2, 1, 4, 3, 6, 5, 0],
        ]
    )
    return k[pattern] / (1.0 - nu**2)


def material_stiffness_unit(mat: MaterialModel) -> np.ndarray:
    """Unit-modulus element stiffness for the configured plane mode."""
    return mat.modulus_scale * element_stiffness_unit(mat.effective_nu)


def constitutive_matrix(mat: MaterialModel, modulus: float | None = None) -> np.ndarray:
    """Voigt ``D`` mapping ``(exx, eyy, gxy)`` to ``(sxx, syy, txy)``."""
    nu = mat.effective_nu
    E = (mat.E0 if modulus is None else modulus) * mat.modulus_scale
    return (E / (1.0 - nu**2)) * np.array(
        [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]]
    )


def strain_displacement(u: float, v: float) -> np.ndarray:
    """``B`` of the bilinear element at local coordinates ``(u, v)``."""
    dN_du = np.array([-(1.0 - v), 1.0 - v, v, -v])
    dN_dv = np.array([-(1.0 - u), -u, u, 1.0 - u])
    B = np.zeros((3, 8))
    B[0, 0::2] = dN_du
    B[1, 1::2] = dN_dv
    B[2, 0::2] = dN_dv
    B[2, 1::2] = dN_du
    return B


def simp_modulus(rho: np.ndarray | float, mat: MaterialModel) -> np.ndarray | float:
    return mat.Emin + np.power(rho, mat.gamma) * (mat.E0 - mat.Emin)


def simp_modulus_derivative(rho: np.ndarray, mat: MaterialModel) -> np.ndarray:
    return mat.gamma * np.power(rho, mat.gamma - 1.0) * (mat.E0 - mat.Emin)


def check_boundary_conditions(grid: CartesianGrid, bc: BoundaryConditions) -> None:
    nodes = [fixed.node for fixed in bc.fixed_dofs] + [load.node for load in bc.loads]
    for node in nodes:
        if node >= grid.n_nodes:
            raise BoundaryConditionError(
                detail=f"node {node} does not exist on a {grid.nx}x{grid.ny} grid"
            )
        if not grid.active_nodes[node]:
            raise BoundaryConditionError(detail=f"node {node} is not attached to an active element")


def assemble_stiffness(
    grid: CartesianGrid, rho: ScalarField, mat: MaterialModel
) -> scipy.sparse.csr_matrix:
    KE = material_stiffness_unit(mat)
    moduli = simp_modulus(rho.values, mat)
    rows = np.repeat(grid.edof, 8, axis=1).ravel()
    columns = np.tile(grid.edof, (1, 8)).ravel()
    entries = (KE.ravel()[None, :] * moduli[:, None]).ravel()
    return scipy.sparse.coo_matrix(
        (entries, (rows, columns)), shape=(grid.n_dofs, grid.n_dofs)
    ).tocsr()


def free_dofs(grid: CartesianGrid, bc: BoundaryConditions) -> np.ndarray:
    active = np.repeat(grid.active_nodes, 2)
    active[bc.fixed_dof_indices()] = False
    return np.flatnonzero(active)


def _solve_direct(K: scipy.sparse.csr_matrix, F: np.ndarray) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.sparse.linalg.MatrixRankWarning)
        try:
            return scipy.sparse.linalg.spsolve(K.tocsc(), F)
        except (scipy.sparse.linalg.MatrixRankWarning, RuntimeError) as exc:
            raise SingularSystemError() from exc


def _solve_cg(
    K: scipy.sparse.csr_matrix,
    F: np.ndarray,
    settings: SolverSettings,
    initial_guess: np.ndarray | None,
) -> tuple[np.ndarray, int]:
    diagonal = K.diagonal()
    if np.any(diagonal <= 0.0):
        raise SingularSystemError(detail="stiffness diagonal has non-positive entries")
    preconditioner = scipy.sparse.linalg.LinearOperator(
        K.shape, matvec=lambda x: x / diagonal, dtype=float
    )
    iterations = 0

    def count(_xk: np.ndarray) -> None:
        nonlocal iterations
        iterations += 1

    solution, info = scipy.sparse.linalg.cg(
        K,
        F,
        x0=initial_guess,
        rtol=settings.tolerance,
        atol=0.0,
        maxiter=settings.max_iterations,
        M=preconditioner,
        callback=count,
    )
    if info > 0:
        residual = np.linalg.norm(K @ solution - F) / np.linalg.norm(F)
        raise SolverConvergenceError(iterations=iterations, residual=float(residual))
    if info < 0:
        raise SingularSystemError(detail="conjugate gradient breakdown")
    return solution, iterations


def assemble_and_solve(
    grid: CartesianGrid,
    rho: ScalarField,
    bc: BoundaryConditions,
    mat: MaterialModel,
    solver: SolverSettings | None = None,
    initial_guess: DisplacementField | None = None,
) -> tuple[DisplacementField, LinearSystemSummary]:
    """Solve ``K(rho) U = F`` with fixed dofs eliminated."""
    solver = solver or SolverSettings()
    check_boundary_conditions(grid, bc)
    free = free_dofs(grid, bc)
    forces = bc.load_vector(grid.n_dofs)
    U = np.zeros(grid.n_dofs)
    F_free = forces[free]
    norm_F = float(np.linalg.norm(F_free))
    if norm_F == 0.0:
        logger.info("Load vector vanishes on the free dofs, displacement is zero")
        iterations = 0 if solver.kind is SolverKind.CG else None
        summary = LinearSystemSummary(solver=solver.kind, iterations=iterations, relative_residual=0.0)
        return DisplacementField(grid, U), summary

    K = assemble_stiffness(grid, rho, mat)[free][:, free]
    iterations = None
    if solver.kind is SolverKind.DIRECT:
        U_free = _solve_direct(K, F_free)
    else:
        guess = None if initial_guess is None else initial_guess.values[free]
        U_free, iterations = _solve_cg(K, F_free, solver, guess)

    if not np.all(np.isfinite(U_free)):
        raise SingularSystemError()
    residual = float(np.linalg.norm(K @ U_free - F_free) / norm_F)
    if solver.kind is SolverKind.DIRECT and residual > solver.tolerance:
        raise SingularSystemError(detail=f"relative residual {residual:.3e} after factorization")
    U[free] = U_free
    logger.debug(f"Solved {free.size} dofs with {solver.kind.value}, residual {residual:.2e}")
    return DisplacementField(grid, U), LinearSystemSummary(
        solver=solver.kind, iterations=iterations, relative_residual=residual
    )


def compliance(U: DisplacementField, bc: BoundaryConditions) -> float:
    """Strain energy ``0.5 U.F`` at equilibrium."""
    return 0.5 * float(U.values @ bc.load_vector(U.grid.n_dofs))


def unit_strain_energies(U: DisplacementField, mat: MaterialModel) -> np.ndarray:
    """``u_e^T k u_e`` per element for the unit-modulus stiffness ``k``."""
    ue = U.element_vectors
    return np.einsum("ei,ij,ej->e", ue, material_stiffness_unit(mat), ue)


def element_strain_energy_density(
    U: DisplacementField, rho: ScalarField, mat: MaterialModel
) -> np.ndarray:
    """``u_e^T k_e u_e`` with ``k_e`` scaled by the SIMP modulus of each element."""
    return simp_modulus(rho.values, mat) * unit_strain_energies(U, mat)
