class BaseError(Exception):
    def __init__(self, name: str, message: str, status_code: int, exit_code: int):
        self.name = name
        self.message = message
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(self.message)


class ConfigurationError(BaseError):
    def __init__(
        self,
        detail: str,
        line: int | None = None,
        status_code: int = 422,
        exit_code: int = 1,
        name: str = "ConfigurationError",
    ):
        self.name = name
        self.line = line
        self.message = f"line {line}: {detail}" if line is not None else detail
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class GridDimensionError(BaseError):
    def __init__(
        self,
        nx: int,
        ny: int,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "GridDimensionError",
    ):
        self.name = name
        self.message = f"Grid dimensions must be positive, got nx={nx}, ny={ny}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class EmptyMaskError(BaseError):
    def __init__(
        self,
        detail: str = "Active mask has no active element.",
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "EmptyMaskError",
    ):
        self.name = name
        self.message = detail
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class InvalidRadiusError(BaseError):
    def __init__(
        self,
        radius: float,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "InvalidRadiusError",
    ):
        self.name = name
        self.message = f"Radius must be positive, got {radius}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class ParameterRangeError(BaseError):
    def __init__(
        self,
        parameter: str,
        value: float,
        allowed: str,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "ParameterRangeError",
    ):
        self.name = name
        self.message = f"Parameter {parameter}={value} is outside {allowed}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class BoundaryConditionError(BaseError):
    def __init__(
        self,
        detail: str,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "BoundaryConditionError",
    ):
        self.name = name
        self.message = f"Invalid boundary conditions: {detail}"
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class PoissonRatioError(BaseError):
    def __init__(
        self,
        nu: float,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "PoissonRatioError",
    ):
        self.name = name
        self.message = f"Poisson ratio {nu} is outside (-1, 0.5)."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class OutsideDomainError(BaseError):
    def __init__(
        self,
        x: float,
        y: float,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "OutsideDomainError",
    ):
        self.name = name
        self.message = f"Point ({x}, {y}) is outside the active domain."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class SingularSystemError(BaseError):
    def __init__(
        self,
        detail: str = "stiffness matrix is singular, check the supports",
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "SingularSystemError",
    ):
        self.name = name
        self.message = f"Linear system could not be solved: {detail}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class SolverConvergenceError(BaseError):
    def __init__(
        self,
        iterations: int,
        residual: float,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "SolverConvergenceError",
    ):
        self.name = name
        self.message = (
            f"Iterative solver did not converge after {iterations} iterations "
            f"(relative residual {residual:.3e})."
        )
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class StructurallyUnstablePointError(BaseError):
    def __init__(
        self,
        delta: float,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "StructurallyUnstablePointError",
    ):
        self.name = name
        self.message = f"Degenerate point is structurally unstable (delta={delta:.3e})."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class TangentInconsistencyError(BaseError):
    def __init__(
        self,
        detail: str,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "TangentInconsistencyError",
    ):
        self.name = name
        self.message = f"Separatrix tangents are inconsistent: {detail}"
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class FamilyAssignmentError(BaseError):
    def __init__(
        self,
        x: float,
        y: float,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "FamilyAssignmentError",
    ):
        self.name = name
        self.message = f"Could not assign a stress family to the ray sampled at ({x:.4f}, {y:.4f})."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class DegenerateConstraintError(BaseError):
    def __init__(
        self,
        iteration: int,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "DegenerateConstraintError",
    ):
        self.name = name
        self.message = f"Constraint gradient vanished everywhere at iteration {iteration}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class MmaInputError(BaseError):
    def __init__(
        self,
        detail: str,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "MmaInputError",
    ):
        self.name = name
        self.message = f"Invalid MMA input: {detail}"
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class DualSubproblemError(BaseError):
    def __init__(
        self,
        steps: int,
        kkt_norm: float,
        status_code: int = 500,
        exit_code: int = 2,
        name: str = "DualSubproblemError",
    ):
        self.name = name
        self.message = (
            f"MMA dual subproblem did not converge after {steps} steps "
            f"(KKT norm {kkt_norm:.3e})."
        )
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class DensityFileError(BaseError):
    def __init__(
        self,
        path: str,
        detail: str,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "DensityFileError",
    ):
        self.name = name
        self.message = f"Density file {path} is invalid: {detail}"
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class OutputWriteError(BaseError):
    def __init__(
        self,
        path: str,
        status_code: int = 500,
        exit_code: int = 1,
        name: str = "OutputWriteError",
    ):
        self.name = name
        self.message = f"Could not write output file {path}."
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )


class ArtifactFileError(BaseError):
    def __init__(
        self,
        path: str,
        detail: str,
        status_code: int = 400,
        exit_code: int = 1,
        name: str = "ArtifactFileError",
    ):
        self.name = name
        self.message = f"Run artifact {path} could not be read: {detail}"
        self.status_code = status_code
        self.exit_code = exit_code
        super().__init__(
            name=self.name,
            message=self.message,
            status_code=self.status_code,
            exit_code=self.exit_code,
        )
