"""Jacobi-Gauss, Jacobi-Gauss-Radau and Jacobi-Gauss-Lobatto quadrature.

Nodes and weights come from the eigen-decomposition of the symmetric
tridiagonal Jacobi matrix (Golub-Welsch). Endpoint rules modify the last
row of that matrix so that the prescribed endpoints become eigenvalues.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, DomainError, NonFiniteSampleError
from .specfun import JacobiParams

__all__ = [
    "RuleKind",
    "QuadratureRule",
    "jacobi_gauss",
    "jacobi_gauss_radau",
    "jacobi_gauss_lobatto",
    "map_to_interval",
    "integrate",
    "jacobi_moment",
    "MAX_NODES",
]

MAX_NODES = 256


class RuleKind(enum.Enum):
    GAUSS = "gauss"
    RADAU_LEFT = "radau_left"
    RADAU_RIGHT = "radau_right"
    LOBATTO = "lobatto"


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a Jacobi-weighted rule.

    ``lo`` and ``hi`` record the interval the nodes live on; freshly built
    rules use ``[-1, 1]``. Weights already contain the Jacobi weight, so
    ``integrate`` only samples the smooth factor.
    """

    kind: RuleKind
    params: JacobiParams
    nodes: np.ndarray
    weights: np.ndarray
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self) -> None:
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return self.nodes.size


def jacobi_moment(k: int, a: float, b: float) -> float:
    r"""Exact moment :math:`\int_{-1}^1 x^k (1-x)^a (1+x)^b dx`.

    Starts from the Beta integral ``m_0 = 2**(a+b+1) B(a+1, b+1)`` and uses
    the integration-by-parts recursion
    ``(j + a + b + 2) m_{j+1} = j m_{j-1} + (b - a) m_j``.
    Serves as the independent oracle for rule exactness.
    """
    m_prev = 0.0
    m_cur = math.exp(
        (a + b + 1.0) * math.log(2.0) + math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(a + b + 2.0)
    )
    for j in range(k):
        m_prev, m_cur = m_cur, (j * m_prev + (b - a) * m_cur) / (j + a + b + 2.0)
    return m_cur


def _recurrence(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Diagonal, off-diagonal and zeroth moment of the orthonormal Jacobi matrix."""
    k = np.arange(n, dtype=float)
    ab = a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (ab + 2.0)
    if n > 1:
        kk = k[1:]
        diag[1:] = (b * b - a * a) / ((2.0 * kk + ab) * (2.0 * kk + ab + 2.0))
    off = np.empty(max(n - 1, 0))
    if n > 1:
        off[0] = math.sqrt(4.0 * (1.0 + a) * (1.0 + b) / ((ab + 2.0) ** 2 * (ab + 3.0)))
        kk = np.arange(2, n, dtype=float)
        c = 2.0 * kk + ab
        off[1:] = np.sqrt(4.0 * kk * (kk + a) * (kk + b) * (kk + ab) / (c * c * (c + 1.0) * (c - 1.0)))
    mu0 = math.exp(
        (ab + 1.0) * math.log(2.0) + math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(ab + 2.0)
    )
    return diag, off, mu0


def _solve_shifted(diag: np.ndarray, off: np.ndarray, z: float) -> np.ndarray:
    """Solve ``(J - z I) g = e_last`` for a symmetric tridiagonal ``J``."""
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - z
    ab[2, :-1] = off
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return linalg.solve_banded((1, 1), ab, rhs)


def _eig_rule(diag, off, mu0, kind, params, pinned=()):
    try:
        nodes, vecs = linalg.eigh_tridiagonal(diag, off)
    except linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    weights = mu0 * vecs[0, :] ** 2
    order = np.argsort(nodes)
    nodes = np.clip(nodes[order], -1.0, 1.0)
    weights = weights[order]
    for idx, value in pinned:
        nodes[idx] = value
    if np.any(weights <= 0.0) or np.any(np.diff(nodes) <= 0.0):
        raise ConvergenceError(f"degenerate {kind.value} rule for n={diag.size}")
    return QuadratureRule(kind, params, nodes, weights)


def _validate(n: int, a: float, b: float, minimum: int) -> JacobiParams:
    if int(n) != n or n < minimum:
        raise DomainError(f"rule size must be an integer >= {minimum}, got {n}")
    if n > MAX_NODES:
        raise DomainError(f"rule size {n} exceeds the supported cap {MAX_NODES}")
    return JacobiParams(a, b)


def jacobi_gauss(n: int, a: float, b: float) -> QuadratureRule:
    """``n``-point Jacobi-Gauss rule, exact up to degree ``2n - 1``."""
    params = _validate(n, a, b, 1)
    diag, off, mu0 = _recurrence(n, a, b)
    return _eig_rule(diag, off, mu0, RuleKind.GAUSS, params)


def jacobi_gauss_radau(n: int, a: float, b: float, fixed: str = "left") -> QuadratureRule:
    """``n``-point Jacobi-Gauss-Radau rule with one node pinned at an endpoint.

    ``fixed`` is ``"left"`` (node at -1) or ``"right"`` (node at +1). Exact up
    to degree ``2n - 2``.
    """
    params = _validate(n, a, b, 2)
    if fixed not in ("left", "right"):
        raise DomainError(f"fixed must be 'left' or 'right', got {fixed!r}")
    z = -1.0 if fixed == "left" else 1.0
    diag, off, mu0 = _recurrence(n, a, b)
    g = _solve_shifted(diag[:-1], off[:-1], z)
    diag = diag.copy()
    diag[-1] = z + off[-1] ** 2 * g[-1]
    kind = RuleKind.RADAU_LEFT if fixed == "left" else RuleKind.RADAU_RIGHT
    pin = (0, -1.0) if fixed == "left" else (n - 1, 1.0)
    return _eig_rule(diag, off, mu0, kind, params, (pin,))


def jacobi_gauss_lobatto(n: int, a: float, b: float) -> QuadratureRule:
    """``n``-point Jacobi-Gauss-Lobatto rule with both endpoints pinned.

    Exact up to degree ``2n - 3``.
    """
    params = _validate(n, a, b, 2)
    diag, off, mu0 = _recurrence(n, a, b)
    if n == 2:
        # both nodes are the endpoints; weights follow from the first two moments
        m0, m1 = mu0, jacobi_moment(1, a, b)
        w = np.array([(m0 - m1) / 2.0, (m0 + m1) / 2.0])
        return QuadratureRule(RuleKind.LOBATTO, params, np.array([-1.0, 1.0]), w)
    g = _solve_shifted(diag[:-1], off[:-1], -1.0)
    h = _solve_shifted(diag[:-1], off[:-1], 1.0)
    # [1, -g_last; 1, -h_last] [d, e^2]^T = [-1, 1]^T
    det = -h[-1] + g[-1]
    d_last = (-1.0 * -h[-1] - (-g[-1]) * 1.0) / det
    e_sq = (1.0 - (-1.0)) / det
    diag = diag.copy()
    diag[-1] = d_last
    off = off.copy()
    off[-1] = math.sqrt(e_sq)
    return _eig_rule(diag, off, mu0, RuleKind.LOBATTO, params, ((0, -1.0), (n - 1, 1.0)))


def map_to_interval(rule: QuadratureRule, lo: float, hi: float) -> QuadratureRule:
    """Affinely map a reference rule onto ``[lo, hi]``.

    Only the Jacobian ``(hi - lo) / 2`` is applied to the weights. Power
    factors coming from the Jacobi weight itself, e.g. ``((hi - lo) / 2)**(a + b)``,
    are the caller's responsibility.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    half = 0.5 * (hi - lo)
    ref_nodes = (rule.nodes - rule.lo) / (rule.hi - rule.lo) * 2.0 - 1.0
    ref_weights = rule.weights * 2.0 / (rule.hi - rule.lo)
    nodes = lo + half * (ref_nodes + 1.0)
    if rule.kind in (RuleKind.RADAU_LEFT, RuleKind.LOBATTO):
        nodes[0] = lo
    if rule.kind in (RuleKind.RADAU_RIGHT, RuleKind.LOBATTO):
        nodes[-1] = hi
    return QuadratureRule(rule.kind, rule.params, nodes, half * ref_weights, lo, hi)


def integrate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Return ``sum(w_i * f(x_i))``; ``f`` is called once on the node array."""
    vals = np.asarray(f(rule.nodes), dtype=float)
    vals = np.broadcast_to(vals, rule.nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSampleError("integrand is not finite at every quadrature node")
    return float(np.dot(rule.weights, vals))
