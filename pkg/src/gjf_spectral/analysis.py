"""Error norms, convergence sweeps, the viscosity study and the appendix constant checks."""

from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .gjf import BasisSet, FracOrders
from .oracle import ProblemSpec, exact_function, manufactured_source
from .quadrature import jacobi_gauss
from .solver import CoeffMatrix, evaluate_grid, solve_problem
from .specfun import jacobi_norm_const

__all__ = [
    "ErrorReport",
    "ConvergenceRow",
    "ConvergenceTable",
    "RateFit",
    "ViscosityRecord",
    "CheckResult",
    "NormSpec",
    "parse_norm_id",
    "l2_error",
    "sobolev_seminorm_error",
    "exact_seminorm",
    "error_report",
    "fit_rate",
    "family_rates",
    "convergence_sweep",
    "viscosity_study",
    "snapshot_distance",
    "appendix_checks",
    "max_workers",
]

#: Relative error below which a sweep point counts as roundoff plateau.
PLATEAU_FLOOR = 1e-10
FIT_POINTS = 4


def max_workers() -> int:
    """Thread cap from ``GJF_SPECTRAL_THREADS`` (default: CPU count, at most 8)."""
    raw = os.environ.get("GJF_SPECTRAL_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError as exc:
            raise DomainError(f"GJF_SPECTRAL_THREADS must be a positive integer, got {raw!r}") from exc
        if n < 1:
            raise DomainError(f"GJF_SPECTRAL_THREADS must be a positive integer, got {raw!r}")
        return n
    return min(os.cpu_count() or 1, 8)


# ---------------------------------------------------------------- norms


@dataclass(frozen=True)
class NormSpec:
    """Which error norm to measure.

    ``l2`` is the plain L2 norm. Otherwise the norm is
    ``|| D_t^{r+l} D_x^{rho+k} (u_L - u) ||`` where ``r = s`` and ``rho = sigma``
    unless given, optionally with the Jacobi weights ``(1-x^2)**k`` and
    ``(1-y^2)**l``.
    """

    norm_id: str
    is_l2: bool = False
    k: int = 0
    l: int = 0
    weighted: bool = False


_NORM_RE = re.compile(r"^(?:(l2)|([tx])(\d)(w?))$")


def parse_norm_id(norm_id: str) -> NormSpec:
    """Parse ``l2``, ``t<l>`` (time seminorm ``H^{s+l}(I; H^sigma)``), ``x<k>``
    (``H^s(I; H^{sigma+k})``), each seminorm optionally suffixed ``w`` for the weighted variant."""
    m = _NORM_RE.match(norm_id.strip())
    if not m:
        raise DomainError(f"unknown norm id {norm_id!r}; use l2, t<l>, x<k> with optional suffix w")
    if m.group(1):
        return NormSpec("l2", is_l2=True)
    n = int(m.group(3))
    k, l = (0, n) if m.group(2) == "t" else (n, 0)
    return NormSpec(norm_id.strip(), False, k, l, bool(m.group(4)))


def _default_q(basis: BasisSet) -> int:
    return max(basis.M, basis.N) + 24


def l2_error(u: CoeffMatrix, exact: Callable, quad_size: Optional[int] = None) -> float:
    """``||u_L - u||`` over ``[-1, 1] x [0, T]`` by a tensor Gauss-Legendre rule."""
    q = quad_size or _default_q(u.basis)
    rule = jacobi_gauss(q, 0.0, 0.0)
    x = rule.nodes
    t = 0.5 * u.basis.T * (rule.nodes + 1.0)
    err = evaluate_grid(u, x, t) - exact(x[:, None], t[None, :])
    return math.sqrt(max(float(rule.weights @ err**2 @ rule.weights) * 0.5 * u.basis.T, 0.0))


def _seminorm_rules(basis: BasisSet, r, rho, k, l, weighted, q):
    if (k and abs(rho - basis.sigma) > 1e-12) or (l and abs(r - basis.s) > 1e-12):
        raise DomainError("integer augmentation k, l is only defined on top of rho = sigma, r = s")
    if weighted:
        ax = float(k) if k else rho - basis.sigma
        at = float(l) if l else r - basis.s
    else:
        ax = at = 0.0
    return jacobi_gauss(q, ax, ax), jacobi_gauss(q, at, at)


def sobolev_seminorm_error(
    u: CoeffMatrix,
    spec: ProblemSpec,
    r: Optional[float] = None,
    rho: Optional[float] = None,
    k: int = 0,
    l: int = 0,
    quad_size: Optional[int] = None,
    weighted: bool = False,
) -> float:
    """``|| D_t^{r+l} D_x^{rho+k} (u_L - u) ||`` with left RL derivatives.

    ``r`` and ``rho`` default to ``s`` and ``sigma``. The unweighted variant
    uses plain L2; the weighted one uses ``(1-x^2)**(rho - sigma)`` or
    ``(1-x^2)**k`` in space and the analogous time weight in ``y = 2t/T - 1``.
    """
    b = u.basis
    r = b.s if r is None else r
    rho = b.sigma if rho is None else rho
    q = quad_size or _default_q(b)
    rx, rt = _seminorm_rules(b, r, rho, k, l, weighted, q)
    t = 0.5 * b.T * (rt.nodes + 1.0)
    num = evaluate_grid(u, rx.nodes, t, r=r + l, rho=rho + k)
    ex = exact_function(spec, r + l, rho + k)(rx.nodes[:, None], t[None, :])
    err = num - ex
    return math.sqrt(max(float(rx.weights @ err**2 @ rt.weights) * 0.5 * b.T, 0.0))


def exact_seminorm(spec: ProblemSpec, norm: NormSpec, quad_size: int = 64) -> float:
    """Norm of the exact solution matching ``norm``; used to form relative errors."""
    o = spec.orders
    rule = jacobi_gauss(quad_size, 0.0, 0.0)
    if norm.is_l2:
        f = exact_function(spec)
        rx = rt = rule
    else:
        f = exact_function(spec, o.s + norm.l, o.sigma + norm.k)
        a_x = float(norm.k) if norm.weighted else 0.0
        a_t = float(norm.l) if norm.weighted else 0.0
        rx, rt = jacobi_gauss(quad_size, a_x, a_x), jacobi_gauss(quad_size, a_t, a_t)
    t = 0.5 * o.T * (rt.nodes + 1.0)
    v = f(rx.nodes[:, None], t[None, :])
    return math.sqrt(float(rx.weights @ v**2 @ rt.weights) * 0.5 * o.T)


def _measure(u: CoeffMatrix, spec: ProblemSpec, norm: NormSpec, quad_size: Optional[int]) -> float:
    if norm.is_l2:
        return l2_error(u, exact_function(spec), quad_size)
    return sobolev_seminorm_error(u, spec, k=norm.k, l=norm.l, quad_size=quad_size, weighted=norm.weighted)


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    seminorms: dict
    M: int
    N: int
    wall_time: float


def error_report(
    spec: ProblemSpec, M: int, N: int, norm_ids: Sequence[str] = ("t0",), quad_size: Optional[int] = None
) -> tuple[CoeffMatrix, ErrorReport]:
    """Solve ``spec`` at ``(M, N)`` and measure the L2 error plus the requested seminorms.

    Seminorm keys are ``(r + l, rho + k, k, l, weighted)`` tuples.
    """
    t0 = time.perf_counter()
    u = solve_problem(BasisSet(spec.orders, M, N), manufactured_source(spec), quad_size)
    l2 = _measure(u, spec, parse_norm_id("l2"), None)
    semis = {}
    for nid in norm_ids:
        n = parse_norm_id(nid)
        if n.is_l2:
            continue
        key = (spec.orders.s + n.l, spec.orders.sigma + n.k, n.k, n.l, n.weighted)
        semis[key] = _measure(u, spec, n, None)
    return u, ErrorReport(l2, semis, M, N, time.perf_counter() - t0)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    N: int
    variant: str
    norm_id: str
    error: float
    relative: float


@dataclass(frozen=True)
class RateFit:
    """Least-squares fits of ``log10(error)`` against ``n`` and ``log10(n)``.

    ``semilog_rate`` is decades of decay per mode, ``loglog_rate`` the
    algebraic order; both are reported positive for decaying errors.
    """

    points: tuple
    semilog_rate: float
    semilog_r2: float
    loglog_rate: float
    loglog_r2: float

    @property
    def preferred(self) -> str:
        return "semilog" if self.semilog_r2 >= self.loglog_r2 else "loglog"


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def fit_rate(ns: Sequence[float], errors: Sequence[float], points: int = FIT_POINTS) -> RateFit:
    """Fit the last ``points`` entries of an error sequence."""
    ns = np.asarray(ns, dtype=float)[-points:]
    e = np.asarray(errors, dtype=float)[-points:]
    if ns.size < 2:
        raise DomainError("a rate fit needs at least two points")
    if np.any(e <= 0.0):
        raise DomainError("errors must be positive for a logarithmic fit")
    ly = np.log10(e)
    s1, r1 = _linfit(ns, ly)
    s2, r2 = _linfit(np.log10(ns), ly)
    return RateFit(tuple(int(v) for v in ns), -s1, r1, -s2, r2)


@dataclass
class ConvergenceTable:
    """Sweep results sorted by ``(norm_id, M, N)``."""

    rows: list
    swept: str = "N"
    fits: dict = field(default_factory=dict)

    def series(self, norm_id: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        sel = [r for r in self.rows if r.norm_id == norm_id]
        key = (lambda r: r.N) if self.swept == "N" else (lambda r: r.M)
        sel.sort(key=key)
        return (
            np.array([key(r) for r in sel]),
            np.array([r.error for r in sel]),
            np.array([r.relative for r in sel]),
        )

    def norm_ids(self) -> list:
        seen = []
        for r in self.rows:
            if r.norm_id not in seen:
                seen.append(r.norm_id)
        return seen


def family_rates(
    table: ConvergenceTable, norm_ids: Sequence[str], floor: float = PLATEAU_FLOOR, points: int = FIT_POINTS
) -> dict:
    """Decay rates of several norms fitted over one common window.

    The window is the set of sweep values at which every listed norm still
    has relative error above ``floor`` (points below it sit on the roundoff
    plateau); the last ``points`` values of that window are fitted.
    """
    ns = None
    keep = None
    for nid in norm_ids:
        n, _, rel = table.series(nid)
        ok = rel > floor
        if ns is None:
            ns, keep = n, ok
        else:
            if not np.array_equal(ns, n):
                raise DomainError("norms were swept over different parameter values")
            keep = keep & ok
    if ns is None or np.count_nonzero(keep) < 2:
        raise DomainError("fewer than two sweep points above the roundoff floor")
    out = {}
    for nid in norm_ids:
        n, e, _ = table.series(nid)
        out[nid] = fit_rate(n[keep], e[keep], points)
    return out


def convergence_sweep(
    spec: ProblemSpec,
    M_list: Sequence[int],
    N_list: Sequence[int],
    norm_ids: Sequence[str] = ("l2",),
    quad_size: Optional[int] = None,
    workers: Optional[int] = None,
) -> ConvergenceTable:
    """Solve at every ``(M, N)`` in ``M_list x N_list`` and record the requested norms.

    The swept parameter is whichever list has more than one entry (``N`` on a
    tie). Per-norm rate fits over the last four points are stored in ``fits``.
    """
    M_list, N_list = [int(m) for m in M_list], [int(n) for n in N_list]
    if not M_list or not N_list:
        raise DomainError("M_list and N_list must be non-empty")
    norms = [parse_norm_id(n) for n in norm_ids]
    refs = {n.norm_id: exact_seminorm(spec, n) for n in norms}
    source = manufactured_source(spec)
    pairs = [(m, n) for m in sorted(set(M_list)) for n in sorted(set(N_list))]

    def work(pair):
        m, n = pair
        u = solve_problem(BasisSet(spec.orders, m, n), source, quad_size)
        return [(nm.norm_id, _measure(u, spec, nm, None)) for nm in norms]

    nw = workers or max_workers()
    if nw > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(p) for p in pairs]

    variant = spec.variant.value
    rows = [
        ConvergenceRow(m, n, variant, nid, err, err / refs[nid] if refs[nid] > 0 else float("inf"))
        for (m, n), res in zip(pairs, results)
        for nid, err in res
    ]
    order = {n.norm_id: i for i, n in enumerate(norms)}
    rows.sort(key=lambda r: (order[r.norm_id], r.M, r.N))
    swept = "M" if len(set(M_list)) > 1 and len(set(N_list)) == 1 else "N"
    table = ConvergenceTable(rows, swept)
    if len(pairs) >= 2 and (len(set(M_list)) == 1 or len(set(N_list)) == 1):
        for nid in order:
            n, e, _ = table.series(nid)
            if np.all(e > 0):
                table.fits[nid] = fit_rate(n, e)
    return table


# ---------------------------------------------------------------- viscosity


@dataclass(frozen=True)
class ViscosityRecord:
    """Solution snapshot on a fixed grid for one viscosity weight."""

    eps: float
    x: np.ndarray
    t: np.ndarray
    values: np.ndarray  # shape (len(x), len(t))
    max_value: float
    l2_at_T: float
    l2_error: float  # against the eps = 0 exact solution


def viscosity_study(
    spec: ProblemSpec,
    eps_list: Iterable[float],
    M: int = 20,
    N: int = 20,
    grid: int = 101,
    quad_size: Optional[int] = None,
) -> list:
    """Solve with each ``eps`` while keeping the source of ``spec`` fixed.

    The source is built once from ``spec`` (for TP3 this is the ``eps = 0``
    source), so changing ``eps`` changes the operator only.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise DomainError("eps_list must be non-empty")
    source = manufactured_source(spec)
    exact = exact_function(spec)
    x = np.linspace(-1.0, 1.0, grid)
    t = np.linspace(0.0, spec.orders.T, grid)
    gl = jacobi_gauss(max(M, 24) + 24, 0.0, 0.0)
    records = []
    for eps in eps_list:
        orders = FracOrders(
            spec.orders.alpha, spec.orders.beta, spec.orders.gamma, spec.orders.mu, eps, spec.orders.T
        )
        u = solve_problem(BasisSet(orders, M, N), source, quad_size)
        vals = evaluate_grid(u, x, t)
        end = evaluate_grid(u, gl.nodes, np.array([spec.orders.T]))[:, 0]
        records.append(
            ViscosityRecord(
                eps,
                x,
                t,
                vals,
                float(np.max(vals)),
                math.sqrt(float(gl.weights @ end**2)),
                l2_error(u, exact),
            )
        )
    return records


def snapshot_distance(a: ViscosityRecord, b: ViscosityRecord) -> float:
    """Max-norm distance between two snapshots on the same grid."""
    if a.values.shape != b.values.shape:
        raise DomainError("snapshots live on different grids")
    return float(np.max(np.abs(a.values - b.values)))


# ---------------------------------------------------------------- appendix


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    params: str
    passed: bool
    detail: str = ""


def _gbar(n: int, a: float) -> float:
    return jacobi_norm_const(n, a, a)


def _cbar(o: FracOrders, eps: float, i: int, j: int) -> float:
    sig, s = o.sigma, o.s
    return (
        _gbar(i - 1, sig) * _gbar(j - 1, s - o.alpha / 2)
        - _gbar(i - 1, sig - o.beta / 2) * _gbar(j - 1, s)
        - eps * _gbar(i - 1, sig - o.mu / 2) * _gbar(j - 1, s - o.gamma / 2)
        + _gbar(i - 1, sig) * _gbar(j - 1, s)
    )


def appendix_checks(order_sets: Optional[dict] = None, n_max: int = 20, idx_max: int = 30) -> list:
    """Numerical checks of the normalisation-constant lemmas and the positivity of ``Cbar_ij``.

    * ``monotone``: ``a -> gbar_n^{(a,a)}`` strictly increases on ``a = 0, 0.01, .., 1`` for ``1 <= n <= n_max``.
    * ``two_sided``: ``gbar_n^{(a,a)} <= gbar_n^{(b,b)} <= 4**(b-a) gbar_n^{(a,a)}`` for all grid pairs ``a <= b``.
    * ``positivity``: ``Cbar_ij > 0`` for ``2 <= i, j <= idx_max`` and
      ``eps in {0, min(2**(gamma-alpha), 1)}`` at each order set.
    """
    if order_sets is None:
        order_sets = {
            "tp1": ProblemSpec.preset("tp1").orders,
            "tp3": ProblemSpec.preset("tp3").orders,
        }
    grid = np.round(np.arange(0, 101) * 0.01, 10)
    out = []
    for n in range(1, n_max + 1):
        g = np.array([_gbar(n, a) for a in grid])
        diffs = np.diff(g)
        ok = bool(np.all(diffs > 0))
        out.append(CheckResult("monotone", f"n={n}", ok, f"min step {diffs.min():.3e}"))
        # rows index a, columns index b; only pairs with a <= b are constrained
        lower = g[None, :] >= g[:, None] * (1 - 1e-14)
        upper = g[None, :] <= 4.0 ** (grid[None, :] - grid[:, None]) * g[:, None] * (1 + 1e-14)
        pairs = np.triu(np.ones((grid.size, grid.size), dtype=bool))
        ok2 = bool(np.all((lower & upper) | ~pairs))
        out.append(CheckResult("two_sided", f"n={n}", ok2))
    for name, o in order_sets.items():
        for eps in (0.0, o.eps_max):
            vals = np.array([[_cbar(o, eps, i, j) for j in range(2, idx_max + 1)] for i in range(2, idx_max + 1)])
            out.append(
                CheckResult("positivity", f"{name};eps={eps:.17g}", bool(np.all(vals > 0)), f"min {vals.min():.6e}")
            )
    return out
