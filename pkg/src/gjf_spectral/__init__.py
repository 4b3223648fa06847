"""Space-time Petrov-Galerkin spectral method with generalized Jacobi functions.

Solves the space-time fractional reaction-diffusion equation with a fractional
viscosity term on ``(-1, 1) x (0, T]`` with homogeneous boundary and initial data.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, GJFError, NonFiniteSampleError, SingularSystemError
from .gjf import BasisKind, BasisSet, FracOrders, basis_frac_deriv, basis_table
from .assembly import load_matrix, space_matrix, time_matrix
from .solver import CoeffMatrix, LinearSystem, assemble, evaluate, evaluate_frac_deriv, solve, solve_problem
from .oracle import ProblemSpec, Variant, exact_function, manufactured_source
from .analysis import appendix_checks, convergence_sweep, error_report, l2_error, viscosity_study

__all__ = [
    "__version__",
    "GJFError",
    "DomainError",
    "ConvergenceError",
    "NonFiniteSampleError",
    "SingularSystemError",
    "FracOrders",
    "BasisSet",
    "BasisKind",
    "basis_frac_deriv",
    "basis_table",
    "space_matrix",
    "time_matrix",
    "load_matrix",
    "CoeffMatrix",
    "LinearSystem",
    "assemble",
    "solve",
    "solve_problem",
    "evaluate",
    "evaluate_frac_deriv",
    "ProblemSpec",
    "Variant",
    "exact_function",
    "manufactured_source",
    "l2_error",
    "error_report",
    "convergence_sweep",
    "viscosity_study",
    "appendix_checks",
]
