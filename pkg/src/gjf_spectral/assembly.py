"""Petrov-Galerkin matrices, load matrix and closed-form Gram entries.

All integrals are taken over products of a trial-function derivative with a
test-function (or trial-function) derivative. The endpoint powers carried by
the GJFs are pulled out analytically and absorbed into a Jacobi weight, so
every quadrature sees a polynomial integrand.

Time integrals are written in the reference variable ``y = 2t/T - 1``. A
time weight ``(1 - y)**a (1 + y)**b`` therefore means the weight evaluated at
``y(t)``, integrated against ``dt``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NonFiniteSampleError
from .gjf import BasisKind, BasisSet, basis_table
from .quadrature import jacobi_gauss, jacobi_gauss_lobatto, jacobi_gauss_radau

__all__ = [
    "MatrixRole",
    "OperatorMatrix",
    "LoadMatrix",
    "space_matrix",
    "time_matrix",
    "gram_space_closed",
    "gram_time_closed",
    "gram_space_augmented",
    "gram_time_augmented",
    "load_matrix",
    "default_quad_size",
]

_TOL = 1e-12


class MatrixRole(enum.Enum):
    SPACE_P = "space_P"
    TIME_Q = "time_Q"


@dataclass(frozen=True)
class OperatorMatrix:
    """``P_rho`` (space, ``(M-1) x (M-1)``) or ``Q_r`` (time, ``N x N``).

    Row index is the trial function, column index the test function.
    """

    values: np.ndarray
    role: MatrixRole
    order: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class LoadMatrix:
    """``F[i', j'] = (f, phibar_{i'} psibar_{j'})`` over the space-time domain."""

    values: np.ndarray


def default_quad_size(basis: BasisSet) -> int:
    return max(basis.M, basis.N) + 12


def _check_order(order: float, top: float, name: str) -> float:
    if order < -_TOL or order > top + _TOL:
        raise DomainError(f"{name} must lie in [0, {top}], got {order}")
    return min(max(order, 0.0), top)


def space_matrix(rho: float, basis: BasisSet) -> OperatorMatrix:
    """``P_rho[i, i'] = (left D^rho phi_i, right D^rho phibar_{i'})`` on ``[-1, 1]``."""
    rho = _check_order(rho, basis.sigma, "rho")
    delta = basis.sigma - rho
    # integrand = (1-x)^delta (1+x)^delta * polynomial of degree <= 2(M-1)
    rule = jacobi_gauss(basis.M + 1, delta, delta)
    trial = basis_table(BasisKind.TRIAL_SPACE, rho, basis, rule.nodes, reduced=True)
    test = basis_table(BasisKind.TEST_SPACE, rho, basis, rule.nodes, reduced=True)
    return OperatorMatrix((trial * rule.weights) @ test.T, MatrixRole.SPACE_P, rho)


def time_matrix(r: float, basis: BasisSet) -> OperatorMatrix:
    """``Q_r[j, j'] = (left D^r psi_j, right D^r psibar_{j'})`` on ``[0, T]``."""
    r = _check_order(r, basis.s, "r")
    delta = basis.s - r
    rule = jacobi_gauss(basis.N + 1, delta, delta)
    t = 0.5 * basis.T * (rule.nodes + 1.0)
    trial = basis_table(BasisKind.TRIAL_TIME, r, basis, t, reduced=True)
    test = basis_table(BasisKind.TEST_TIME, r, basis, t, reduced=True)
    values = 0.5 * basis.T * ((trial * rule.weights) @ test.T)
    return OperatorMatrix(values, MatrixRole.TIME_Q, r)


def _check_pair(i: int, ip: int, top: int, name: str) -> None:
    for v in (i, ip):
        if int(v) != v or not 1 <= v <= top:
            raise DomainError(f"{name} index must lie in 1..{top}, got {v}")


def _gratio(num: float, den: float) -> float:
    """``Gamma(num) / Gamma(den)`` with ``den`` allowed at the poles (giving 0)."""
    if den <= 0.0 and den == math.floor(den):
        return 0.0
    return math.exp(math.lgamma(num) - math.lgamma(den))


def gram_space_closed(rho: float, i: int, i_prime: int, basis: BasisSet) -> float:
    """Trial-trial Gram entry of order ``rho`` with weight ``(1-x^2)**(rho - sigma)``.

    Tridiagonal in ``(i, i')``; at ``rho = sigma`` the weight is 1 and the
    entries are the Legendre inner products of ``L_{i-1} - c_i L_i``.
    """
    rho = _check_order(rho, basis.sigma, "rho")
    _check_pair(i, i_prime, basis.n_space, "space")
    sig = basis.sigma
    lo = min(i, i_prime)
    c = (lo + sig) / (lo - sig)
    g = _gratio(lo - sig + rho + 1.0, lo + sig - rho + 1.0)
    if i == i_prime:
        return (2.0 / (2 * i - 1) * (i + sig - rho) / (i - sig + rho) + 2.0 / (2 * i + 1) * c * c) * g
    if abs(i - i_prime) == 1:
        return -2.0 / (2 * lo + 1) * c * g
    return 0.0


def gram_time_closed(r: float, j: int, j_prime: int, basis: BasisSet) -> float:
    """Trial-trial time Gram entry of order ``r`` with weight ``(1-y^2)**(r - s)``.

    Diagonal: ``(T/2)**(2(s-r)) Gamma(j-s+r) / Gamma(j+s-r)``.
    """
    r = _check_order(r, basis.s, "r")
    _check_pair(j, j_prime, basis.n_time, "time")
    if j != j_prime:
        return 0.0
    d = basis.s - r
    return (0.5 * basis.T) ** (2.0 * d) * _gratio(j - d, j + d)


def gram_space_augmented(k: int, i: int, i_prime: int, basis: BasisSet) -> float:
    """Gram entry of the order ``sigma + k`` derivatives with weight ``(1-x^2)**k``."""
    if int(k) != k or k < 0:
        raise DomainError(f"k must be a non-negative integer, got {k}")
    _check_pair(i, i_prime, basis.n_space, "space")
    sig = basis.sigma
    lo = min(i, i_prime)
    c = (lo + sig) / (lo - sig)
    g = _gratio(lo + k + 1.0, lo - k + 1.0)
    if i == i_prime:
        # (i-k)/(i+k) * Gamma(i+k+1)/Gamma(i-k+1) == Gamma(i+k)/Gamma(i-k)
        return 2.0 / (2 * i - 1) * _gratio(i + k, i - k) + 2.0 / (2 * i + 1) * c * c * g
    if abs(i - i_prime) == 1:
        return -2.0 / (2 * lo + 1) * c * g
    return 0.0


def gram_time_augmented(l: int, j: int, j_prime: int, basis: BasisSet) -> float:
    """Gram entry of the order ``s + l`` time derivatives with weight ``(1-y^2)**l``.

    Diagonal: ``(2/T)**(2l) Gamma(j+l) / Gamma(j-l)``, zero for ``j <= l``.
    """
    if int(l) != l or l < 0:
        raise DomainError(f"l must be a non-negative integer, got {l}")
    _check_pair(j, j_prime, basis.n_time, "time")
    if j != j_prime:
        return 0.0
    return (2.0 / basis.T) ** (2 * l) * _gratio(j + l, j - l)


def load_matrix(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    basis: BasisSet,
    quad_size: Optional[int] = None,
) -> LoadMatrix:
    """Project a source ``f(x, t)`` onto the test basis.

    Space uses a Jacobi-Gauss-Lobatto rule with weight ``(1-x)**sigma`` and
    time a Jacobi-Gauss-Radau rule with weight ``(1-y)**s`` whose fixed node
    sits at ``t = 0``. ``f`` is called once with broadcastable arrays of
    shape ``(n, 1)`` and ``(1, n)``.
    """
    n = default_quad_size(basis) if quad_size is None else int(quad_size)
    if n < 2:
        raise DomainError(f"quad_size must be >= 2, got {quad_size}")
    xr = jacobi_gauss_lobatto(n, basis.sigma, 0.0)
    yr = jacobi_gauss_radau(n, basis.s, 0.0, fixed="left")
    t = 0.5 * basis.T * (yr.nodes + 1.0)
    vals = np.asarray(f(xr.nodes[:, None], t[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (xr.nodes.size, t.size))
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSampleError("source term is not finite at every quadrature node")
    sx = basis_table(BasisKind.TEST_SPACE, 0.0, basis, xr.nodes, reduced=True) * xr.weights
    st = basis_table(BasisKind.TEST_TIME, 0.0, basis, t, reduced=True) * (0.5 * basis.T * yr.weights)
    return LoadMatrix(sx @ vals @ st.T)
