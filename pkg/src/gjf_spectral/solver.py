"""Linear system of the space-time Petrov-Galerkin scheme and solution evaluation.

The discrete problem is the matrix equation

    P0^T U Qa - Pb^T U Q0 - eps * Pm^T U Qg + P0^T U Q0 = F

for the ``(M-1) x N`` coefficient matrix ``U``. It is solved as one dense
system on ``vec(U)``, where ``vec`` stacks columns: all space modes of time
mode 1, then time mode 2, and so on (numpy ``order="F"``). With that
stacking ``vec(A U B) = kron(B^T, A) vec(U)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.linalg import lapack

from .assembly import LoadMatrix, MatrixRole, OperatorMatrix, load_matrix, space_matrix, time_matrix
from .errors import DomainError, SingularSystemError
from .gjf import BasisKind, BasisSet, basis_table

__all__ = [
    "CoeffMatrix",
    "LinearSystem",
    "build_system",
    "assemble",
    "solve",
    "solve_problem",
    "evaluate",
    "evaluate_grid",
    "evaluate_frac_deriv",
    "stack",
    "unstack",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


def stack(U: np.ndarray) -> np.ndarray:
    """Column-major ``vec(U)``: index ``(i, j)`` maps to ``i + (M-1) * j``."""
    return np.asarray(U, dtype=float).reshape(-1, order="F")


def unstack(v: np.ndarray, n_space: int, n_time: int) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape((n_space, n_time), order="F")


@dataclass(frozen=True)
class CoeffMatrix:
    """Expansion coefficients ``U[i-1, j-1]`` of ``phi_i(x) psi_j(t)``."""

    values: np.ndarray
    basis: BasisSet
    condition: float = float("nan")
    residual: float = float("nan")

    def __post_init__(self) -> None:
        shape = (self.basis.n_space, self.basis.n_time)
        if self.values.shape != shape:
            raise DomainError(f"coefficient shape {self.values.shape} does not match basis {shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("coefficients must be finite")


@dataclass
class LinearSystem:
    """Dense system matrix together with the six factor matrices it came from."""

    matrix: np.ndarray
    n_space: int
    n_time: int
    factors: dict = field(repr=False)
    eps: float = 0.0
    rhs: Optional[np.ndarray] = None
    basis: Optional[BasisSet] = None

    stacking = "column-major: vec index i + (M-1)*j for space mode i, time mode j (0-based)"

    def apply(self, U: np.ndarray) -> np.ndarray:
        """Left-hand side of the matrix equation, computed with two-sided products."""
        f = self.factors
        out = f["P0"].T @ U @ f["Qa"] - f["Pb"].T @ U @ f["Q0"] + f["P0"].T @ U @ f["Q0"]
        if self.eps:
            out = out - self.eps * (f["Pm"].T @ U @ f["Qg"])
        return out


def _expect(m: OperatorMatrix, role: MatrixRole, size: int, name: str) -> np.ndarray:
    if m.role is not role or m.values.shape != (size, size):
        raise DomainError(f"{name} must be a {role.value} matrix of shape ({size}, {size}), got {m.values.shape}")
    return m.values


def build_system(
    P0: OperatorMatrix,
    P_beta: OperatorMatrix,
    P_mu: OperatorMatrix,
    Q_alpha: OperatorMatrix,
    Q0: OperatorMatrix,
    Q_gamma: OperatorMatrix,
    eps: float,
) -> LinearSystem:
    """Kronecker form of the matrix equation under column-major stacking."""
    ns, nt = P0.values.shape[0], Q0.values.shape[0]
    f = {
        "P0": _expect(P0, MatrixRole.SPACE_P, ns, "P0"),
        "Pb": _expect(P_beta, MatrixRole.SPACE_P, ns, "P_beta"),
        "Pm": _expect(P_mu, MatrixRole.SPACE_P, ns, "P_mu"),
        "Qa": _expect(Q_alpha, MatrixRole.TIME_Q, nt, "Q_alpha"),
        "Q0": _expect(Q0, MatrixRole.TIME_Q, nt, "Q0"),
        "Qg": _expect(Q_gamma, MatrixRole.TIME_Q, nt, "Q_gamma"),
    }
    K = np.kron(f["Qa"].T, f["P0"].T) - np.kron(f["Q0"].T, f["Pb"].T) + np.kron(f["Q0"].T, f["P0"].T)
    if eps:
        K -= eps * np.kron(f["Qg"].T, f["Pm"].T)
    return LinearSystem(K, ns, nt, f, float(eps))


def assemble(basis: BasisSet) -> LinearSystem:
    """Build every factor matrix for ``basis.orders`` and the resulting system."""
    o = basis.orders
    system = build_system(
        space_matrix(0.0, basis),
        space_matrix(o.beta / 2.0, basis),
        space_matrix(o.mu / 2.0, basis),
        time_matrix(o.alpha / 2.0, basis),
        time_matrix(0.0, basis),
        time_matrix(o.gamma / 2.0, basis),
        o.eps,
    )
    system.basis = basis
    return system


def solve(system: LinearSystem, load: LoadMatrix, basis: Optional[BasisSet] = None) -> CoeffMatrix:
    """Solve the system by dense LU with partial pivoting.

    ``basis`` defaults to the one recorded by :func:`assemble`.

    Raises
    ------
    SingularSystemError
        If the reciprocal 1-norm condition estimate is below machine epsilon.
    """
    basis = basis if basis is not None else system.basis
    if basis is None:
        raise DomainError("solve needs the basis; pass it or build the system with assemble()")
    F = np.asarray(load.values, dtype=float)
    if F.shape != (system.n_space, system.n_time):
        raise DomainError(f"load shape {F.shape} does not match system ({system.n_space}, {system.n_time})")
    K = system.matrix
    anorm = np.linalg.norm(K, 1)
    lu, piv, info = lapack.dgetrf(K)
    if info > 0:
        raise SingularSystemError("system matrix has an exactly zero pivot", float("inf"))
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    cond = 1.0 / rcond if rcond > 0 else float("inf")
    log.debug("system of size %d, 1-norm condition estimate %.3e", K.shape[0], cond)
    if not rcond > np.finfo(float).eps:
        raise SingularSystemError(f"system is singular to working precision (condition ~ {cond:.3e})", cond)
    system.rhs = stack(F)
    U = unstack(linalg.lu_solve((lu, piv), system.rhs), system.n_space, system.n_time)
    res = float(np.max(np.abs(system.apply(U) - F), initial=0.0))
    if res > RESIDUAL_TOL * (1.0 + np.max(np.abs(F), initial=0.0)):
        log.warning("matrix-equation residual %.3e exceeds tolerance (condition ~ %.3e)", res, cond)
    return CoeffMatrix(U, basis, cond, res)


def solve_problem(
    basis: BasisSet,
    source: Callable[[np.ndarray, np.ndarray], np.ndarray],
    quad_size: Optional[int] = None,
) -> CoeffMatrix:
    """Assemble and solve for the source ``f(x, t)`` on ``basis``."""
    return solve(assemble(basis), load_matrix(source, basis, quad_size), basis)


def evaluate_grid(u: CoeffMatrix, x, t, r: float = 0.0, rho: float = 0.0) -> np.ndarray:
    """Derivative ``D_t^r D_x^rho u_L`` on the tensor grid ``x`` by ``t``, shape ``(nx, nt)``."""
    px = basis_table(BasisKind.TRIAL_SPACE, rho, u.basis, x)
    pt = basis_table(BasisKind.TRIAL_TIME, r, u.basis, t)
    return px.T @ u.values @ pt


def evaluate_frac_deriv(u: CoeffMatrix, r: float, rho: float, x, t):
    """Left RL derivative of order ``r`` in time and ``rho`` in space, pointwise.

    ``x`` and ``t`` broadcast against each other. Orders ``sigma + k`` and
    ``s + l`` with integer ``k, l`` are accepted.
    """
    x_arr, t_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    px = basis_table(BasisKind.TRIAL_SPACE, rho, u.basis, x_arr.ravel())
    pt = basis_table(BasisKind.TRIAL_TIME, r, u.basis, t_arr.ravel())
    vals = np.einsum("ip,ij,jp->p", px, u.values, pt).reshape(x_arr.shape)
    return float(vals) if vals.ndim == 0 else vals


def evaluate(u: CoeffMatrix, x, t):
    """Numerical solution ``sum_ij U[i, j] phi_i(x) psi_j(t)``."""
    return evaluate_frac_deriv(u, 0.0, 0.0, x, t)
