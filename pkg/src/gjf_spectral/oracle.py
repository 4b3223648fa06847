"""Reference values that do not go through the spectral basis.

* Direct Riemann-Liouville derivatives from the defining singular integral.
* A small calculus for fractional power series ``sum_k a_k z**(p0 + k)``,
  on which RL derivatives act term by term.
* Exact solutions and manufactured sources of the three test problems.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from .errors import DomainError
from .gjf import FracOrders, safe_power
from .quadrature import jacobi_gauss
from .specfun import mittag_leffler

__all__ = [
    "SeriesOrigin",
    "FracPowerSeries",
    "Variant",
    "ProblemSpec",
    "ml_power_series",
    "series_rl_deriv",
    "rl_left_numeric",
    "rl_right_numeric",
    "exact_solution",
    "exact_function",
    "manufactured_source",
    "series_source",
    "tp3_source_display",
    "SERIES_TERMS",
]

#: Truncation of the Mittag-Leffler series; the tail is far below 1e-16 for arguments up to 2.
SERIES_TERMS = 60
MAX_TERMS = 400


class SeriesOrigin(enum.Enum):
    LEFT_AT_MINUS1 = "left_at_minus1"  # variable xi = 1 + x
    LEFT_AT_ZERO = "left_at_zero"  # variable tau = 2 t / T


@dataclass(frozen=True)
class FracPowerSeries:
    """``prefactor * sum_k coeffs[k] * z**(p0 + k)`` with ``z = scale * (point - base)``.

    ``base`` is -1 for :attr:`SeriesOrigin.LEFT_AT_MINUS1` and 0 for
    :attr:`SeriesOrigin.LEFT_AT_ZERO`. Derivatives produced by
    :func:`series_rl_deriv` are taken with respect to the physical point, so
    they pick up ``scale**rho`` in the prefactor.
    """

    origin: SeriesOrigin
    p0: float
    coeffs: np.ndarray
    prefactor: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if not self.p0 > -1.0:
            raise DomainError(f"leading exponent must exceed -1, got {self.p0}")
        if coeffs.ndim != 1 or not 1 <= coeffs.size <= MAX_TERMS:
            raise DomainError(f"need between 1 and {MAX_TERMS} coefficients, got {coeffs.size}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def base(self) -> float:
        return -1.0 if self.origin is SeriesOrigin.LEFT_AT_MINUS1 else 0.0

    def variable(self, point):
        return self.scale * (np.asarray(point, dtype=float) - self.base)

    def __call__(self, point):
        z = self.variable(point)
        out = self.prefactor * safe_power(z, self.p0) * npoly.polyval(z, self.coeffs)
        return float(out) if np.ndim(out) == 0 else out


def ml_power_series(c: float, origin: SeriesOrigin, scale: float = 1.0, terms: int = SERIES_TERMS) -> FracPowerSeries:
    """Series of ``z**c * E_{1, c+1}(z)``, i.e. coefficients ``1 / Gamma(c + k + 1)``."""
    k = np.arange(terms)
    return FracPowerSeries(origin, c, special.rgamma(c + k + 1.0), 1.0, scale)


def series_rl_deriv(sfs: FracPowerSeries, rho: float) -> FracPowerSeries:
    """Term-wise left RL derivative of order ``rho >= 0``.

    ``a_k -> a_k Gamma(p0+k+1) / Gamma(p0+k+1-rho)`` and ``p0 -> p0 - rho``.
    Terms whose new exponent is a negative integer vanish and are dropped.
    """
    if rho < 0.0:
        raise DomainError(f"derivative order must be >= 0, got {rho}")
    if rho == 0.0:
        return sfs
    k = np.arange(sfs.coeffs.size)
    e = sfs.p0 + k + 1.0
    new = sfs.coeffs * np.exp(special.gammaln(e)) * special.rgamma(e - rho)
    nz = np.flatnonzero(new)
    if nz.size == 0:
        return FracPowerSeries(sfs.origin, max(sfs.p0 - rho, 0.0), np.zeros(1), 0.0, sfs.scale)
    first = nz[0]
    p0 = sfs.p0 - rho + first
    if not p0 > -1.0:
        raise DomainError(f"derivative of order {rho} leaves the non-integrable exponent {p0}")
    return FracPowerSeries(sfs.origin, p0, new[first:], sfs.prefactor * sfs.scale**rho, sfs.scale)


# ---------------------------------------------------------------- RL oracle


def _fd_derivative(g: Callable[[float], float], z: float, n: int, h: float, forward: bool = False) -> float:
    """Fourth-order finite difference of order ``n`` in {1, 2}."""
    if forward:
        v = [g(z + m * h) for m in range(6)]
        if n == 1:
            return (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
        return (45 * v[0] - 154 * v[1] + 214 * v[2] - 156 * v[3] + 61 * v[4] - 10 * v[5]) / (12 * h * h)
    v = [g(z + m * h) for m in (-2, -1, 0, 1, 2)]
    if n == 1:
        return (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
    return (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)


def _frac_integral(f, nu: float, a: float, z: float, n_quad: int, lam: float) -> float:
    """``I^nu f(z) = 1/Gamma(nu) int_a^z (z - xi)**(nu - 1) f(xi) dxi`` with ``f = (xi - a)**lam * g``."""
    rule = jacobi_gauss(n_quad, nu - 1.0, lam)
    half = 0.5 * (z - a)
    xi = a + half * (1.0 + rule.nodes)
    g = np.array([f(v) for v in xi], dtype=float) / (xi - a) ** lam
    return half ** (nu + lam) / math.gamma(nu) * float(np.dot(rule.weights, g))


def _order_split(p: float) -> int:
    if not (0.0 < p < 1.0 or 1.0 < p < 2.0):
        raise DomainError(f"order must lie in (0, 1) or (1, 2), got {p}")
    return 1 if p < 1.0 else 2


def rl_left_numeric(
    f: Callable[[float], float],
    p: float,
    a: float,
    z: float,
    n_quad: int = 40,
    *,
    method: str = "rl",
    left_exponent: float = 0.0,
    h: Optional[float] = None,
) -> float:
    """Left RL derivative of order ``p`` at ``z`` with base point ``a``.

    ``method="rl"`` differentiates the fractional integral ``I^{n-p} f``
    ``n`` times by finite differences. ``method="caputo"`` integrates the
    finite-difference ``f^{(n)}`` against the Caputo kernel, which equals the
    RL derivative only when ``f`` (and ``f'`` for ``p > 1``) vanish at ``a``.

    ``left_exponent`` declares ``f = (xi - a)**left_exponent * g`` with ``g``
    smooth; the power is moved into the quadrature weight. The default step
    ``h`` is 1e-4 for ``p < 1`` and 1e-3 for ``p > 1``, where the second
    difference would otherwise lose about ``eps / h**2`` to roundoff.
    """
    n = _order_split(p)
    if h is None:
        h = 1e-4 if n == 1 else 1e-3
    if not z > a:
        raise DomainError(f"need z > a, got z={z}, a={a}")
    if not left_exponent > -1.0:
        raise DomainError(f"left_exponent must exceed -1, got {left_exponent}")
    nu = n - p
    if method == "rl":
        if z - 2 * h <= a:
            raise DomainError(f"z must lie more than 2h = {2 * h} past the base point")
        return _fd_derivative(lambda w: _frac_integral(f, nu, a, w, n_quad, left_exponent), z, n, h)
    if method != "caputo":
        raise DomainError(f"method must be 'rl' or 'caputo', got {method!r}")
    scale = 1.0 + abs(f(a + 0.5 * (z - a)))
    if abs(f(a)) > 1e-12 * scale or (n == 2 and abs(_fd_derivative(f, a, 1, h, forward=True)) > 1e-7 * scale):
        raise DomainError("Caputo route needs f(a) = 0 (and f'(a) = 0 for p > 1)")
    lam = left_exponent - n if left_exponent - n > -1.0 else 0.0
    rule = jacobi_gauss(n_quad, nu - 1.0, lam)
    half = 0.5 * (z - a)
    xi = a + half * (1.0 + rule.nodes)
    d = np.array([_fd_derivative(f, v, n, h, forward=v - 2 * h <= a) for v in xi])
    return half ** (nu + lam) / math.gamma(nu) * float(np.dot(rule.weights, d / (xi - a) ** lam))


def rl_right_numeric(
    f: Callable[[float], float],
    p: float,
    b: float,
    z: float,
    n_quad: int = 40,
    *,
    method: str = "rl",
    right_exponent: float = 0.0,
    h: Optional[float] = None,
) -> float:
    """Right RL derivative of order ``p`` at ``z < b``, by reflecting onto the left case."""
    if not z < b:
        raise DomainError(f"need z < b, got z={z}, b={b}")
    return rl_left_numeric(
        lambda w: f(-w), p, -b, -z, n_quad, method=method, left_exponent=right_exponent, h=h
    )


# ---------------------------------------------------------------- test problems


class Variant(enum.Enum):
    TP1 = "tp1"
    TP2 = "tp2"
    TP3 = "tp3"
    CUSTOM = "custom"


_DEFAULTS = {
    Variant.TP1: dict(alpha=0.5, beta=1.2, gamma=0.2, mu=1.8, eps=1.0, eta=4.0, theta=4.0),
    Variant.TP2: dict(alpha=0.5, beta=1.2, gamma=0.2, mu=1.8, eps=1.0, eta=8.0, theta=8.0),
    Variant.TP3: dict(alpha=0.5, beta=1.5, gamma=0.5, mu=1.5, eps=0.0, eta=4.0, theta=4.0),
}


@dataclass(frozen=True)
class ProblemSpec:
    """A test problem: fractional orders plus the regularity offsets ``eta`` and ``theta``.

    All variants share the exact solution
    ``(1-x)(1+x)**(sigma+eta) E_{1,sigma+eta+1}(1+x) * tau**(s+theta) E_{1,s+theta+1}(tau)``
    with ``tau = 2t/T``. TP3 keeps the source of the ``eps = 0`` equation
    whatever ``orders.eps`` is.
    """

    orders: FracOrders
    eta: float = 4.0
    theta: float = 4.0
    variant: Variant = Variant.CUSTOM

    def __post_init__(self) -> None:
        if self.eta < 0.0 or self.theta < 0.0:
            raise DomainError(f"eta and theta must be >= 0, got {self.eta}, {self.theta}")

    @classmethod
    def preset(cls, variant, **overrides) -> "ProblemSpec":
        """Defaults of ``tp1``/``tp2``/``tp3`` with optional field overrides (including ``T``)."""
        variant = Variant(variant)
        if variant is Variant.CUSTOM:
            raise DomainError("custom problems have no preset; build ProblemSpec directly")
        vals = dict(_DEFAULTS[variant], T=1.0)
        unknown = set(overrides) - set(vals)
        if unknown:
            raise DomainError(f"unknown problem fields: {sorted(unknown)}")
        vals.update({k: v for k, v in overrides.items() if v is not None})
        eta, theta = vals.pop("eta"), vals.pop("theta")
        return cls(FracOrders(**vals), eta, theta, variant)

    def with_eps(self, eps: float) -> "ProblemSpec":
        return replace(self, orders=replace(self.orders, eps=eps))

    @property
    def space_exponent(self) -> float:
        return self.orders.sigma + self.eta

    @property
    def time_exponent(self) -> float:
        return self.orders.s + self.theta


def exact_solution(spec: ProblemSpec) -> tuple[FracPowerSeries, FracPowerSeries]:
    """Space factor (series in ``1 + x``) and time factor (series in ``2t/T``)."""
    c = spec.space_exponent
    k = np.arange(SERIES_TERMS + 1)
    # (1 - x) = 2 - xi merges two shifted copies of the coefficient sequence
    a = 2.0 * special.rgamma(c + k + 1.0)
    a[1:] -= special.rgamma(c + k[1:])
    space = FracPowerSeries(SeriesOrigin.LEFT_AT_MINUS1, c, a)
    time = ml_power_series(spec.time_exponent, SeriesOrigin.LEFT_AT_ZERO, 2.0 / spec.orders.T)
    return space, time


def exact_function(spec: ProblemSpec, r: float = 0.0, rho: float = 0.0) -> Callable:
    """``(x, t) -> D_t^r D_x^rho u(x, t)`` for the exact solution (left RL derivatives)."""
    space, time = exact_solution(spec)
    ds, dt = series_rl_deriv(space, rho), series_rl_deriv(time, r)
    return lambda x, t: ds(x) * dt(t)


def series_source(spec: ProblemSpec, eps: Optional[float] = None) -> Callable:
    """Source obtained by applying the full operator to the exact solution term by term."""
    o = spec.orders
    eps = o.eps if eps is None else eps
    X, Y = exact_solution(spec)
    Ya, Xb = series_rl_deriv(Y, o.alpha), series_rl_deriv(X, o.beta)
    Xm, Yg = series_rl_deriv(X, o.mu), series_rl_deriv(Y, o.gamma)

    def f(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        X0, Y0 = X(x), Y(t)
        out = X0 * Ya(t) - Xb(x) * Y0 + X0 * Y0
        if eps:
            out = out - eps * Xm(x) * Yg(t)
        return out

    return f


def tp3_source_display(spec: ProblemSpec) -> Callable:
    """Closed-form source of the ``eps = 0`` equation written with Mittag-Leffler calls.

    The time term carries the chain-rule factor ``(2/T)**alpha`` and the
    products ``tau**d * tau**(-alpha)`` are evaluated as one power so that
    ``t = 0`` stays finite.
    """
    o = spec.orders
    c, d = spec.space_exponent, spec.time_exponent
    al, be = o.alpha, o.beta

    def f(x, t):
        x = np.asarray(x, dtype=float)
        xi = 1.0 + x
        tau = 2.0 * np.asarray(t, dtype=float) / o.T
        e_t = mittag_leffler(1.0, d + 1.0, tau)
        first = safe_power(xi, c) * (1.0 - x) * mittag_leffler(1.0, c + 1.0, xi) * (
            (2.0 / o.T) ** al * safe_power(tau, d - al) * mittag_leffler(1.0, d - al + 1.0, tau)
            + safe_power(tau, d) * e_t
        )
        second = (
            safe_power(xi, c - be)
            * safe_power(tau, d)
            * e_t
            * ((1.0 - x) * mittag_leffler(1.0, c - be + 1.0, xi) - be * xi * mittag_leffler(1.0, c - be + 2.0, xi))
        )
        return first - second

    return f


def manufactured_source(spec: ProblemSpec) -> Callable:
    """Source term for ``spec``: series calculus for TP1/TP2/custom, the fixed ``eps = 0`` display for TP3."""
    if spec.variant is Variant.TP3:
        return tp3_source_display(spec)
    return series_source(spec)
