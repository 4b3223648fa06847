"""Exception types raised across the package."""


class GJFError(Exception):
    """Base class for all package errors."""


class DomainError(GJFError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConvergenceError(GJFError, ArithmeticError):
    """An iterative evaluation hit its cap before meeting its tolerance."""


class NonFiniteSampleError(GJFError, ArithmeticError):
    """A sampled integrand value was NaN or infinite."""


class SingularSystemError(GJFError, ArithmeticError):
    """The discrete linear system is singular to working precision."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition
