"""Acceptance criteria A1-A9.

Each test prints one ``A<n> PASS|FAIL: ...`` line (also repeated in the
pytest terminal summary) and then asserts the criterion at its stated
tolerance.
"""

import time

import numpy as np
import pytest
from scipy import special

from gjf_spectral.analysis import appendix_checks, convergence_sweep, error_report, family_rates
from gjf_spectral.analysis import snapshot_distance, viscosity_study
from gjf_spectral.assembly import (
    LoadMatrix,
    gram_space_augmented,
    gram_space_closed,
    gram_time_augmented,
    gram_time_closed,
    space_matrix,
    time_matrix,
)
from gjf_spectral.gjf import BasisKind, BasisSet, FracOrders, basis_table, gjf_minus, gjf_minus_frac_deriv
from gjf_spectral.gjf import gjf_plus, gjf_plus_frac_deriv
from gjf_spectral.oracle import ProblemSpec, manufactured_source, rl_left_numeric, rl_right_numeric
from gjf_spectral.solver import assemble, evaluate, solve, solve_problem


def test_a1_tp1_spectral_convergence(acceptance_report):
    t0 = time.perf_counter()
    spec = ProblemSpec.preset("tp1")
    _, rep = error_report(spec, 24, 24, ())
    Ns = [8, 12, 16, 20, 24]
    table = convergence_sweep(spec, [24], Ns, ("l2",))
    n, err, _ = table.series("l2")
    slope = -np.polyfit(n, np.log10(err), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = rep.l2 < 1e-8 and slope >= 0.25 and elapsed < 10.0
    acceptance_report(
        "A1",
        ok,
        f"L2 error at M=N=24 = {rep.l2:.2e} (< 1e-8); semilog slope over N={Ns} = {slope:.3f} decades/mode "
        f"(>= 0.25); errors {', '.join(f'{e:.1e}' for e in err)}; {elapsed:.2f} s",
    )
    assert ok


def _p_sigma_closed(n, sigma):
    c = lambda i: (i + sigma) / (i - sigma)
    P = np.zeros((n, n))
    for i in range(1, n + 1):
        P[i - 1, i - 1] = 2.0 / (2 * i - 1) - c(i) ** 2 * 2.0 / (2 * i + 1)
        if i < n:
            P[i - 1, i] = -c(i) * 2.0 / (2 * i + 1)
            P[i, i - 1] = c(i) * 2.0 / (2 * i + 1)
    return P


def test_a2_matrix_identities(acceptance_report):
    t0 = time.perf_counter()
    worst_q = worst_p = worst_off = 0.0
    for sigma in (0.6, 0.75, 0.9):
        for M in (2, 3, 8, 17, 32):
            orders = FracOrders(0.5, 1.1, 0.2, 2 * sigma, 0.5, 1.0)
            b = BasisSet(orders, M, M)
            Q = time_matrix(b.s, b).values
            worst_q = max(worst_q, float(np.max(np.abs(Q - np.eye(M)))))
            P = space_matrix(sigma, b).values
            worst_p = max(worst_p, float(np.max(np.abs(P - _p_sigma_closed(M - 1, sigma)))))
            band = np.abs(np.subtract.outer(np.arange(M - 1), np.arange(M - 1))) > 1
            worst_off = max(worst_off, float(np.max(np.abs(P[band]), initial=0.0)))
    elapsed = time.perf_counter() - t0
    ok = worst_q <= 1e-12 and worst_p <= 1e-11 and worst_off <= 1e-11 and elapsed < 1.0
    acceptance_report(
        "A2",
        ok,
        f"max|Q_s - I| = {worst_q:.1e} (<= 1e-12); max|P_sigma - closed| = {worst_p:.1e} (<= 1e-11); "
        f"max off-band |P_sigma| = {worst_off:.1e}; sigma in {{0.6, 0.75, 0.9}}, M <= 32; {elapsed:.2f} s",
    )
    assert ok


def _quad_gram_space(b, rho, k, nq=40):
    if k:
        x, w = special.roots_jacobi(nq, k, k)
        tab = basis_table(BasisKind.TRIAL_SPACE, b.sigma + k, b, x)
    else:
        d = b.sigma - rho
        # (1+x)^(2d) from the trial pair times the weight (1-x^2)^(-d)
        x, w = special.roots_jacobi(nq, -d, d)
        tab = basis_table(BasisKind.TRIAL_SPACE, rho, b, x, reduced=True)
    return (tab * w) @ tab.T


def _quad_gram_time(b, r, l, nq=40):
    if l:
        y, w = special.roots_jacobi(nq, l, l)
        tab = basis_table(BasisKind.TRIAL_TIME, b.s + l, b, 0.5 * b.T * (y + 1))
    else:
        d = b.s - r
        y, w = special.roots_jacobi(nq, -d, d)
        tab = basis_table(BasisKind.TRIAL_TIME, r, b, 0.5 * b.T * (y + 1), reduced=True)
    return 0.5 * b.T * (tab * w) @ tab.T


def _rel_dev(G_quad, closed):
    """Max deviation relative to the natural entry scale ``sqrt(|G_ii G_jj|)``."""
    n = G_quad.shape[0]
    C = np.array([[closed(i + 1, j + 1) for j in range(n)] for i in range(n)])
    diag = np.sqrt(np.abs(np.outer(np.diag(C), np.diag(C))))
    scale = np.maximum(np.abs(C), diag)
    mask = scale > 0
    dev = np.zeros_like(C)
    dev[mask] = np.abs(G_quad - C)[mask] / scale[mask]
    # entries whose closed form and scale vanish (e.g. time Gram for j <= l) must vanish too
    zero_ok = np.all(np.abs(G_quad[~mask]) < 1e-12)
    return float(dev.max()), zero_ok


def test_a3_closed_form_gram_vs_quadrature(acceptance_report):
    t0 = time.perf_counter()
    orders = FracOrders(0.5, 1.2, 0.5, 1.8, 0.5, T=1.5)  # sigma = 0.9, s = 0.25
    b = BasisSet(orders, 11, 10)
    worst = 0.0
    zeros = True
    detail = []
    for rho in (0.0, 0.6, 0.9):
        d, z = _rel_dev(_quad_gram_space(b, rho, 0), lambda i, j: gram_space_closed(rho, i, j, b))
        worst, zeros = max(worst, d), zeros and z
        detail.append(f"space rho={rho}: {d:.1e}")
    for r in (0.0, 0.1, 0.25):
        d, z = _rel_dev(_quad_gram_time(b, r, 0), lambda i, j: gram_time_closed(r, i, j, b))
        worst, zeros = max(worst, d), zeros and z
        detail.append(f"time r={r}: {d:.1e}")
    for k in (0, 1, 2):
        d, z = _rel_dev(_quad_gram_space(b, b.sigma, k), lambda i, j: gram_space_augmented(k, i, j, b))
        worst, zeros = max(worst, d), zeros and z
        detail.append(f"space k={k}: {d:.1e}")
        d, z = _rel_dev(_quad_gram_time(b, b.s, k), lambda i, j: gram_time_augmented(k, i, j, b))
        worst, zeros = max(worst, d), zeros and z
        detail.append(f"time l={k}: {d:.1e}")
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and zeros and elapsed < 5.0
    acceptance_report("A3", ok, f"worst relative deviation {worst:.1e} (<= 1e-9), indices <= 10, T=1.5; "
                      f"{'; '.join(detail)}; {elapsed:.2f} s")
    assert ok


def test_a4_gjf_derivatives_vs_rl_oracle(acceptance_report):
    t0 = time.perf_counter()
    pts = (-0.8, -0.4, 0.0, 0.4, 0.8)
    a, b = -0.75, 0.75
    worst_abs = worst_rel = 0.0
    for order in (0.25, 0.45, 0.6, 0.9):
        for n in range(0, 7):
            for z in pts:
                closed = gjf_minus_frac_deriv(n, a, b, order, z)
                ref = rl_left_numeric(lambda v: gjf_minus(n, a, b, v), order, -1.0, z, left_exponent=b)
                worst_abs = max(worst_abs, abs(closed - ref))
                worst_rel = max(worst_rel, abs(closed - ref) / max(abs(ref), 1e-300))
                closed = gjf_plus_frac_deriv(n, b, a, order, z)
                ref = rl_right_numeric(lambda v: gjf_plus(n, b, a, v), order, 1.0, z, right_exponent=b)
                worst_abs = max(worst_abs, abs(closed - ref))
                worst_rel = max(worst_rel, abs(closed - ref) / max(abs(ref), 1e-300))
    elapsed = time.perf_counter() - t0
    ok = worst_abs <= 1e-6 and elapsed < 5.0
    acceptance_report(
        "A4",
        ok,
        f"max |closed - RL oracle| = {worst_abs:.1e} (<= 1e-6; worst relative {worst_rel:.1e}); "
        f"left and right GJFs, n <= 6, orders {{0.25, 0.45, 0.6, 0.9}}, 5 interior points; {elapsed:.2f} s",
    )
    assert ok


def test_a5_plant_and_recover(acceptance_report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    b = BasisSet(ProblemSpec.preset("tp1").orders, 10, 8)
    system = assemble(b)
    worst = 0.0
    for _ in range(20):
        U = rng.uniform(-1.0, 1.0, (b.n_space, b.n_time))
        u = solve(system, LoadMatrix(system.apply(U)))
        worst = max(worst, float(np.max(np.abs(u.values - U))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 2.0
    acceptance_report("A5", ok, f"20 planted U at (M,N)=(10,8): max recovery error {worst:.1e} (<= 1e-9); "
                      f"{elapsed:.2f} s")
    assert ok


def test_a6_appendix_constants(acceptance_report):
    t0 = time.perf_counter()
    res = appendix_checks()
    elapsed = time.perf_counter() - t0
    failed = [r for r in res if not r.passed]
    ids = sorted({r.check_id for r in res})
    ok = not failed and set(ids) == {"monotone", "two_sided", "positivity"} and elapsed < 2.0
    acceptance_report("A6", ok, f"{len(res) - len(failed)}/{len(res)} checks passed ({', '.join(ids)}) at TP1 and "
                      f"TP3 orders; {elapsed:.2f} s")
    assert ok


def test_a7_tp2_regularity_ordering(acceptance_report):
    t0 = time.perf_counter()
    spec = ProblemSpec.preset("tp2")
    span = list(range(4, 21))
    by_n = convergence_sweep(spec, [28], span, ("t0", "t1", "t2"))
    by_m = convergence_sweep(spec, span, [28], ("x0", "x1", "x2"))
    rt = family_rates(by_n, ["t0", "t1", "t2"])
    rx = family_rates(by_m, ["x0", "x1", "x2"])
    t_rates = [rt[k].semilog_rate for k in ("t0", "t1", "t2")]
    x_rates = [rx[k].semilog_rate for k in ("x0", "x1", "x2")]
    elapsed = time.perf_counter() - t0
    dec = lambda r: r[0] > r[1] > r[2]
    ok = dec(t_rates) and dec(x_rates) and elapsed < 60.0
    acceptance_report(
        "A7",
        ok,
        f"rates (decades/mode) vs N for l=0,1,2: {', '.join(f'{v:.3f}' for v in t_rates)} "
        f"(fit N={rt['t0'].points}); vs M for k=0,1,2: {', '.join(f'{v:.3f}' for v in x_rates)} "
        f"(fit M={rx['x0'].points}); strictly decreasing required; {elapsed:.2f} s",
    )
    assert ok


def test_a8_tp3_viscosity_study(acceptance_report):
    t0 = time.perf_counter()
    spec = ProblemSpec.preset("tp3")
    six = viscosity_study(spec, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], M=20, N=20)
    finite = all(np.all(np.isfinite(r.values)) for r in six)
    base = six[0]
    steps = [0.4, 0.2, 0.1, 0.05]
    near = viscosity_study(spec, steps, M=20, N=20)
    dists = [snapshot_distance(base, r) for r in near]
    monotone = all(a > b for a, b in zip(dists, dists[1:]))
    elapsed = time.perf_counter() - t0
    ok = base.l2_error < 1e-7 and finite and len(six) == 6 and monotone and elapsed < 30.0
    acceptance_report(
        "A8",
        ok,
        f"eps=0 L2 error {base.l2_error:.1e} (< 1e-7); six-eps sweep peaks "
        f"{', '.join(f'{r.max_value:.4f}' for r in six)}; distance to eps=0 snapshot for steps {steps}: "
        f"{', '.join(f'{d:.4f}' for d in dists)} (decreasing required); {elapsed:.2f} s",
    )
    assert ok


@pytest.fixture(scope="module")
def solved_problems():
    out = []
    for name in ("tp1", "tp2", "tp3"):
        spec = ProblemSpec.preset(name)
        out.append((name, solve_problem(BasisSet(spec.orders, 20, 20), manufactured_source(spec))))
    spec = ProblemSpec.preset("tp3", eps=1.0, T=2.0)
    out.append(("tp3 eps=1 T=2", solve_problem(BasisSet(spec.orders, 12, 10), manufactured_source(spec))))
    return out


def test_a9_boundary_and_initial_conditions(acceptance_report, solved_problems):
    worst = 0.0
    for _, u in solved_problems:
        T = u.basis.T
        t = np.linspace(0.0, T, 50)
        x = np.linspace(-1.0, 1.0, 50)
        edges = [evaluate(u, -1.0, t), evaluate(u, 1.0, t), evaluate(u, x, 0.0)]
        worst = max(worst, max(float(np.max(np.abs(e))) for e in edges))
    ok = worst < 1e-10
    names = ", ".join(n for n, _ in solved_problems)
    acceptance_report("A9", ok, f"max |u| on x=-1, x=1, t=0 (50 points each) = {worst:.1e} (< 1e-10) for {names}")
    assert ok
