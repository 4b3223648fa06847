"""Generalized Jacobi functions and the Petrov-Galerkin basis built from them.

Notation
--------
``gjf_minus(n, a, b, x) = (1 + x)**b * P_n^{(a,b)}(x)`` and
``gjf_plus(n, a, b, x) = (1 - x)**a * P_n^{(a,b)}(x)``. Left Riemann-Liouville
derivatives act on ``gjf_minus`` (base point -1), right derivatives on
``gjf_plus`` (base point +1), and both stay inside the same family.

The trial functions carry a ``(1 + x)**sigma`` / ``t**s`` singularity and vanish
at ``x = +-1`` / ``t = 0``; the test functions carry the mirrored
``(1 - x)**sigma`` / ``(T - t)**s`` factor and vanish at ``x = +-1`` / ``t = T``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError
from .specfun import jacobi_eval, jacobi_table

__all__ = [
    "FracOrders",
    "BasisSet",
    "BasisKind",
    "safe_power",
    "gjf_plus",
    "gjf_minus",
    "gjf_minus_frac_deriv",
    "gjf_plus_frac_deriv",
    "trial_space",
    "trial_time",
    "test_space",
    "test_time",
    "basis_frac_deriv",
    "basis_table",
    "split_order",
]

_ZERO_BASE = 1e-300
_ORDER_TOL = 1e-12


@dataclass(frozen=True)
class FracOrders:
    """Fractional orders and data of the space-time reaction-diffusion problem.

    ``alpha`` and ``gamma`` are time orders in (0, 1), ``beta`` and ``mu`` are
    space orders in (1, 2), ``eps`` weights the viscosity term and ``T`` is
    the final time.
    """

    alpha: float
    beta: float
    gamma: float
    mu: float
    eps: float = 1.0
    T: float = 1.0
    strict_eps: bool = False

    def __post_init__(self) -> None:
        for name in ("alpha", "gamma"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        for name in ("beta", "mu"):
            v = getattr(self, name)
            if not 1.0 < v < 2.0:
                raise DomainError(f"{name} must lie in (1, 2), got {v}")
        if not 0.0 <= self.eps <= 1.0:
            raise DomainError(f"eps must lie in [0, 1], got {self.eps}")
        if self.strict_eps and not self.eps_in_theory_range:
            raise DomainError(
                f"eps must lie in [0, min(2**(gamma - alpha), 1)] = [0, {self.eps_max:.6g}], got {self.eps}"
            )
        if not self.T > 0.0:
            raise DomainError(f"T must be positive, got {self.T}")

    @property
    def eps_in_theory_range(self) -> bool:
        """Whether ``eps <= min(2**(gamma - alpha), 1)``, the range covered by the stability proof."""
        return self.eps <= self.eps_max + 1e-15

    @property
    def eps_max(self) -> float:
        return min(2.0 ** (self.gamma - self.alpha), 1.0)

    @property
    def sigma(self) -> float:
        return max(self.beta, self.mu) / 2.0

    @property
    def s(self) -> float:
        return max(self.alpha, self.gamma) / 2.0


@dataclass(frozen=True)
class BasisSet:
    """Trial/test basis of size ``(M - 1) x N`` for the given orders."""

    orders: FracOrders
    M: int
    N: int

    def __post_init__(self) -> None:
        if int(self.M) != self.M or self.M < 2:
            raise DomainError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be an integer >= 1, got {self.N}")

    @property
    def sigma(self) -> float:
        return self.orders.sigma

    @property
    def s(self) -> float:
        return self.orders.s

    @property
    def T(self) -> float:
        return self.orders.T

    @property
    def n_space(self) -> int:
        return self.M - 1

    @property
    def n_time(self) -> int:
        return self.N


class BasisKind(enum.Enum):
    TRIAL_SPACE = "trial_space"
    TEST_SPACE = "test_space"
    TRIAL_TIME = "trial_time"
    TEST_TIME = "test_time"

    @property
    def is_space(self) -> bool:
        return self in (BasisKind.TRIAL_SPACE, BasisKind.TEST_SPACE)

    @property
    def is_trial(self) -> bool:
        return self in (BasisKind.TRIAL_SPACE, BasisKind.TRIAL_TIME)


def safe_power(base, exponent: float):
    """``base**exponent`` for ``base >= 0`` with ``0**positive == 0`` exactly."""
    base = np.asarray(base, dtype=float)
    if exponent == 0.0:
        out = np.ones_like(base)
    else:
        tiny = base <= _ZERO_BASE
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(tiny, 0.0 if exponent > 0 else np.inf, np.abs(base) ** exponent)
    return float(out) if out.ndim == 0 else out


def _ret(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def gjf_plus(n: int, a: float, b: float, x):
    """Right-singular GJF ``(1 - x)**a * P_n^{(a,b)}(x)``."""
    if not a > -1.0:
        raise DomainError(f"gjf_plus requires a > -1, got {a}")
    return _ret(safe_power(1.0 - np.asarray(x, dtype=float), a) * jacobi_eval(n, a, b, x))


def gjf_minus(n: int, a: float, b: float, x):
    """Left-singular GJF ``(1 + x)**b * P_n^{(a,b)}(x)``."""
    if not b > -1.0:
        raise DomainError(f"gjf_minus requires b > -1, got {b}")
    return _ret(safe_power(1.0 + np.asarray(x, dtype=float), b) * jacobi_eval(n, a, b, x))


def gjf_minus_frac_deriv(n: int, a: float, b: float, s_tilde: float, x):
    """Left RL derivative of order ``s_tilde`` (base point -1) of ``gjf_minus(n, a, b)``.

    Closed form: ``Gamma(n+b+1)/Gamma(n+b-s+1) * gjf_minus(n, a+s, b-s)``.
    """
    if s_tilde < 0.0:
        raise DomainError(f"derivative order must be >= 0, got {s_tilde}")
    if not b > s_tilde - 1.0:
        raise DomainError(f"need b > s_tilde - 1, got b={b}, s_tilde={s_tilde}")
    ratio = math.exp(math.lgamma(n + b + 1.0) - math.lgamma(n + b - s_tilde + 1.0))
    return _ret(ratio * gjf_minus(n, a + s_tilde, b - s_tilde, x))


def gjf_plus_frac_deriv(n: int, a: float, b: float, s_tilde: float, x):
    """Right RL derivative of order ``s_tilde`` (base point +1) of ``gjf_plus(n, a, b)``.

    Closed form: ``Gamma(n+a+1)/Gamma(n+a-s+1) * gjf_plus(n, a-s, b+s)``.
    """
    if s_tilde < 0.0:
        raise DomainError(f"derivative order must be >= 0, got {s_tilde}")
    if not a > s_tilde - 1.0:
        raise DomainError(f"need a > s_tilde - 1, got a={a}, s_tilde={s_tilde}")
    ratio = math.exp(math.lgamma(n + a + 1.0) - math.lgamma(n + a - s_tilde + 1.0))
    return _ret(ratio * gjf_plus(n, a - s_tilde, b + s_tilde, x))


def _check_index(kind: BasisKind, index: int, basis: BasisSet) -> None:
    top = basis.n_space if kind.is_space else basis.n_time
    if int(index) != index or not 1 <= index <= top:
        raise DomainError(f"{kind.value} index must lie in 1..{top}, got {index}")


def _to_ref(t, T: float):
    return 2.0 * np.asarray(t, dtype=float) / T - 1.0


def split_order(kind: BasisKind, order: float, basis: BasisSet) -> tuple[float, int]:
    """Split a derivative order into ``(fractional part, integer augmentation)``.

    Orders in ``[0, sigma]`` (space) or ``[0, s]`` (time) are returned as
    ``(order, 0)``; orders ``sigma + k`` / ``s + l`` as ``(sigma, k)``.
    """
    top = basis.sigma if kind.is_space else basis.s
    if order < -_ORDER_TOL:
        raise DomainError(f"derivative order must be >= 0, got {order}")
    if order <= top + _ORDER_TOL:
        return min(max(order, 0.0), top), 0
    extra = order - top
    k = int(round(extra))
    if abs(extra - k) > 1e-9:
        raise DomainError(
            f"unsupported order {order} for {kind.value}: only [0, {top}] and {top} + integer are available"
        )
    return top, k


def trial_space(i: int, basis: BasisSet, x):
    """Trial function ``phi_i``: combination of ``gjf_minus`` of degrees ``i-1`` and ``i``."""
    return basis_frac_deriv(BasisKind.TRIAL_SPACE, i, 0.0, basis, x)


def test_space(i: int, basis: BasisSet, x):
    """Test function ``phibar_i``, the mirror image of ``phi_i`` built from ``gjf_plus``."""
    return basis_frac_deriv(BasisKind.TEST_SPACE, i, 0.0, basis, x)


def trial_time(j: int, basis: BasisSet, t):
    """Trial function ``psi_j`` on ``[0, T]``; vanishes at ``t = 0``."""
    return basis_frac_deriv(BasisKind.TRIAL_TIME, j, 0.0, basis, t)


def test_time(j: int, basis: BasisSet, t):
    """Test function ``psibar_j`` on ``[0, T]``; vanishes at ``t = T``."""
    return basis_frac_deriv(BasisKind.TEST_TIME, j, 0.0, basis, t)


def basis_frac_deriv(kind: BasisKind, index: int, order: float, basis: BasisSet, point):
    """Fractional derivative of one basis function.

    Trial kinds take the left RL derivative (base point -1 in space, 0 in
    time); test kinds the right one (base point +1, resp. ``T``). Orders up to
    ``sigma`` / ``s`` go through the GJF closed forms; ``sigma + k`` and
    ``s + l`` differentiate the Legendre form ``k`` (resp. ``l``) more times.
    """
    _check_index(kind, index, basis)
    frac, extra = split_order(kind, order, basis)
    sigma, s, T = basis.sigma, basis.s, basis.T

    if kind.is_space:
        x = np.asarray(point, dtype=float)
        i = index
        if extra:
            return _ret(basis_table(kind, order, basis, x)[i - 1])
        pre = math.exp(math.lgamma(i) - math.lgamma(i + sigma))
        c = i / (i - sigma)
        if kind is BasisKind.TRIAL_SPACE:
            v = gjf_minus_frac_deriv(i - 1, -sigma, sigma, frac, x) - c * gjf_minus_frac_deriv(
                i, -sigma, sigma, frac, x
            )
        else:
            v = gjf_plus_frac_deriv(i - 1, sigma, -sigma, frac, x) + c * gjf_plus_frac_deriv(
                i, sigma, -sigma, frac, x
            )
        return _ret(pre * v)

    j = index
    y = _to_ref(point, T)
    if extra:
        return _ret(basis_table(kind, order, basis, point)[j - 1])
    pre = math.exp(math.lgamma(j) - math.lgamma(j + s)) * (T / 2.0) ** (s - 0.5) * math.sqrt(j - 0.5)
    # chain rule for t -> y = 2t/T - 1
    scale = (2.0 / T) ** frac
    if kind is BasisKind.TRIAL_TIME:
        v = gjf_minus_frac_deriv(j - 1, -s, s, frac, y)
    else:
        v = gjf_plus_frac_deriv(j - 1, s, -s, frac, y)
    return _ret(pre * scale * v)


def basis_table(kind: BasisKind, order: float, basis: BasisSet, points, reduced: bool = False) -> np.ndarray:
    """Derivatives of every basis function of one kind at many points.

    Returns an array of shape ``(count, npoints)`` where ``count`` is ``M - 1``
    for space kinds and ``N`` for time kinds. With ``reduced=True`` the
    endpoint factor ``(1 +- x)**(sigma - rho)`` (resp. ``(1 +- y)**(s - r)``
    with ``y = 2t/T - 1``) is left out, so the result is a polynomial table.
    Integer-augmented orders are polynomial already and ignore ``reduced``.
    """
    frac, extra = split_order(kind, order, basis)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    if kind.is_space:
        out = _space_table(kind, frac, extra, basis, pts, reduced)
    else:
        out = _time_table(kind, frac, extra, basis, pts, reduced)
    return out


def _legendre_deriv_table(nmax: int, k: int, x: np.ndarray) -> np.ndarray:
    """``d^k L_n / dx^k`` for ``n = 0..nmax``."""
    out = np.zeros((nmax + 1, x.size))
    if k == 0:
        return jacobi_table(nmax, 0.0, 0.0, x)
    if nmax < k:
        return out
    tab = jacobi_table(nmax - k, float(k), float(k), x)
    n = np.arange(k, nmax + 1)
    scale = np.exp(special.gammaln(n + k + 1.0) - special.gammaln(n + 1.0)) / 2.0**k
    out[k:] = scale[:, None] * tab
    return out


def _space_table(kind, rho, k, basis, x, reduced):
    sigma = basis.sigma
    M1 = basis.n_space
    i = np.arange(1, M1 + 1, dtype=float)
    sign = 1.0 if kind is BasisKind.TEST_SPACE else -1.0
    if k:
        leg = _legendre_deriv_table(M1, k, x)
        c = (i + sigma) / (i - sigma)
        flip = (-1.0) ** k if kind is BasisKind.TEST_SPACE else 1.0
        return flip * (leg[:-1] + sign * c[:, None] * leg[1:])
    delta = sigma - rho
    if kind is BasisKind.TRIAL_SPACE:
        tab = jacobi_table(M1, -delta, delta, x)
        factor = safe_power(1.0 + x, delta)
    else:
        tab = jacobi_table(M1, delta, -delta, x)
        factor = safe_power(1.0 - x, delta)
    pre = np.exp(special.gammaln(i) - special.gammaln(i + delta))
    d = i * (i + sigma) / ((i - sigma) * (i + delta))
    poly = pre[:, None] * (tab[:-1] + sign * d[:, None] * tab[1:])
    return poly if reduced else poly * factor


def _time_table(kind, r, l, basis, t, reduced):
    s, T = basis.s, basis.T
    N = basis.n_time
    j = np.arange(1, N + 1, dtype=float)
    y = _to_ref(t, T)
    if l:
        leg = _legendre_deriv_table(N - 1, l, y)
        flip = (-1.0) ** l if kind is BasisKind.TEST_TIME else 1.0
        scale = flip * (2.0 / T) ** l * (T / 2.0) ** -0.5
        return scale * np.sqrt(j - 0.5)[:, None] * leg
    delta = s - r
    if kind is BasisKind.TRIAL_TIME:
        tab = jacobi_table(N - 1, -delta, delta, y)
        factor = safe_power(1.0 + y, delta)
    else:
        tab = jacobi_table(N - 1, delta, -delta, y)
        factor = safe_power(1.0 - y, delta)
    pre = np.exp(special.gammaln(j) - special.gammaln(j + delta)) * (T / 2.0) ** (delta - 0.5) * np.sqrt(j - 0.5)
    poly = pre[:, None] * tab
    return poly if reduced else poly * factor
