"""Scalar special functions: log-gamma, gamma ratios, Mittag-Leffler series
and classical Jacobi polynomials.

Every function that takes a point ``x`` accepts either a float or a numpy
array and returns the same kind of object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "JacobiParams",
    "MLParams",
    "ln_gamma",
    "gamma_ratio",
    "mittag_leffler",
    "jacobi_eval",
    "jacobi_table",
    "jacobi_deriv",
    "jacobi_norm_const",
    "MAX_DEGREE",
]

#: Largest polynomial degree accepted by the recurrence evaluators.
MAX_DEGREE = 512

ML_TOL = 1e-16
ML_MAX_TERMS = 500


@dataclass(frozen=True)
class JacobiParams:
    """Exponents of the Jacobi weight ``(1 - x)**a * (1 + x)**b``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > -1.0 and self.b > -1.0):
            raise DomainError(
                f"Jacobi parameters must exceed -1, got a={self.a}, b={self.b}"
            )


@dataclass(frozen=True)
class MLParams:
    """Parameters ``(a, b)`` of the two-parameter Mittag-Leffler function."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a > 0.0:
            raise DomainError(f"first Mittag-Leffler parameter must be > 0, got {self.a}")


def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``."""
    if not x > 0.0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gamma_ratio(num, den):
    """Return ``Gamma(num) / Gamma(den)`` evaluated in log space.

    Both arguments must be positive; arrays broadcast.
    """
    num_a = np.asarray(num, dtype=float)
    den_a = np.asarray(den, dtype=float)
    if np.any(num_a <= 0.0) or np.any(den_a <= 0.0):
        raise DomainError(f"gamma_ratio requires positive arguments, got {num}, {den}")
    out = np.exp(special.gammaln(num_a) - special.gammaln(den_a))
    return float(out) if out.ndim == 0 else out


def _check_jacobi(n: int, a: float, b: float) -> None:
    if n < 0 or int(n) != n:
        raise DomainError(f"degree must be a non-negative integer, got {n}")
    if n > MAX_DEGREE:
        raise DomainError(f"degree {n} exceeds the supported cap {MAX_DEGREE}")
    if not (a > -1.0 and b > -1.0):
        raise DomainError(f"Jacobi parameters must exceed -1, got a={a}, b={b}")


def mittag_leffler(a: float, b: float, z):
    r"""Two-parameter Mittag-Leffler function :math:`E_{a,b}(z)` for real ``z``.

    Sums :math:`\sum_k z^k / \Gamma(a k + b)` until a term falls below
    ``1e-16 * (1 + |partial sum|)``. Intended for moderate arguments,
    ``|z| <= 50``.

    Raises
    ------
    ConvergenceError
        If 500 terms are not enough.
    """
    MLParams(a, b)
    z_arr = np.asarray(z, dtype=float)
    if np.any(np.abs(z_arr) > 50.0):
        raise DomainError("mittag_leffler is only supported for |z| <= 50")
    total = np.zeros_like(z_arr)
    zpow = np.ones_like(z_arr)
    small_run = 0
    for k in range(ML_MAX_TERMS):
        term = zpow * special.rgamma(a * k + b)
        total = total + term
        done = np.all(np.abs(term) <= ML_TOL * (1.0 + np.abs(total)))
        # terms only decrease for good once the gamma argument passes |z|**(1/a)
        if done and a * k + b > 1.0 + np.max(np.abs(z_arr), initial=0.0) ** (1.0 / a):
            small_run += 1
            if small_run >= 2:
                return float(total) if total.ndim == 0 else total
        else:
            small_run = 0
        zpow = zpow * z_arr
    raise ConvergenceError(
        f"Mittag-Leffler series E_{{{a},{b}}} did not converge in {ML_MAX_TERMS} terms"
    )


def jacobi_table(nmax: int, a: float, b: float, x) -> np.ndarray:
    """All Jacobi polynomials ``P_0 .. P_nmax`` with parameters ``(a, b)``.

    Returns an array of shape ``(nmax + 1,) + shape(x)`` built with the
    three-term recurrence.
    """
    _check_jacobi(nmax, a, b)
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
    ab = a + b
    a2b2 = a * a - b * b
    for n in range(2, nmax + 1):
        c = 2.0 * n + ab
        d1 = 2.0 * n * (n + ab) * (c - 2.0)
        d2 = (c - 1.0) * (c * (c - 2.0) * x + a2b2)
        d3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * c
        out[n] = (d2 * out[n - 1] - d3 * out[n - 2]) / d1
    return out


def jacobi_eval(n: int, a: float, b: float, x):
    """Evaluate the Jacobi polynomial ``P_n^{(a,b)}(x)`` by recurrence."""
    _check_jacobi(n, a, b)
    val = jacobi_table(n, a, b, x)[n]
    return float(val) if val.ndim == 0 else val


def jacobi_deriv(n: int, a: float, b: float, k: int, x):
    """``k``-th derivative of ``P_n^{(a,b)}`` at ``x``.

    Uses the classical parameter-shift identity; degrees below ``k`` give 0.
    """
    _check_jacobi(n, a, b)
    if k < 0:
        raise DomainError(f"derivative order must be >= 0, got {k}")
    if n < k:
        x = np.asarray(x, dtype=float)
        return 0.0 if x.ndim == 0 else np.zeros_like(x)
    if k == 0:
        return jacobi_eval(n, a, b, x)
    scale = math.exp(
        math.lgamma(n + k + a + b + 1.0) - math.lgamma(n + a + b + 1.0)
    ) / 2.0**k
    return scale * jacobi_eval(n - k, a + k, b + k, x)


def jacobi_norm_const(n: int, a: float, b: float) -> float:
    r"""Squared weighted norm :math:`\int (P_n^{(a,b)})^2 (1-x)^a (1+x)^b dx`."""
    _check_jacobi(n, a, b)
    log_num = (a + b + 1.0) * math.log(2.0) + math.lgamma(n + a + 1.0) + math.lgamma(n + b + 1.0)
    if n == 0:
        # (a + b + 1) * Gamma(a + b + 1) == Gamma(a + b + 2), avoids 0 * inf at a + b = -1
        log_den = math.lgamma(a + b + 2.0)
    else:
        log_den = math.log(2.0 * n + a + b + 1.0) + math.lgamma(n + 1.0) + math.lgamma(n + a + b + 1.0)
    return math.exp(log_num - log_den)
