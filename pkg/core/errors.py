"""
Exception hierarchy shared by all core modules.

Every error carries a short machine-readable ``code`` so that the API layer
and the CLI can map it without string matching.
"""


class FrustrationError(Exception):
    """Raised when a computation on the network model cannot be fulfilled."""

    def __init__(self, message: str, code: str = "UNKNOWN"):
        super().__init__(message)
        self.code = code


class DomainError(FrustrationError):
    """Argument outside the mathematical domain (negative distance, c > c̃₊ ...)."""

    def __init__(self, message: str):
        super().__init__(message, code="DOMAIN")


class ModelError(FrustrationError):
    """Model ingredients are inconsistent with each other."""

    def __init__(self, message: str):
        super().__init__(message, code="MODEL")


class ParameterError(FrustrationError):
    """Numerical parameter (resolution, sample count ...) is unusable."""

    def __init__(self, message: str):
        super().__init__(message, code="PARAMETER")


class DegenerateModelError(FrustrationError):
    """The spatial intensity has zero mass where positive mass is required."""

    def __init__(self, message: str):
        super().__init__(message, code="DEGENERATE")


class EmptyMeasureError(FrustrationError):
    """SIR requested against the zero measure."""

    def __init__(self, message: str = "Interferenz gegen das Nullmass ist undefiniert."):
        super().__init__(message, code="EMPTY_MEASURE")


class GridMismatchError(FrustrationError):
    """Two discretized measures live on different grids."""

    def __init__(self, message: str):
        super().__init__(message, code="GRID_MISMATCH")


class SolverError(FrustrationError):
    """Iterative solver did not converge within its budget."""

    def __init__(self, message: str, residuals: tuple[float, ...] = ()):
        super().__init__(message, code="SOLVER")
        self.residuals = residuals


class InfeasibleError(FrustrationError):
    """The constraint system has no solution."""

    def __init__(self, message: str):
        super().__init__(message, code="INFEASIBLE")


class ScenarioError(FrustrationError):
    """Scenario file unreadable or invalid."""

    def __init__(self, message: str):
        super().__init__(message, code="SCENARIO")
