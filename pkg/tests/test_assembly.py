import numpy as np
import pytest
from scipy import integrate

from gjf_spectral.assembly import (
    MatrixRole,
    default_quad_size,
    gram_space_augmented,
    gram_space_closed,
    gram_time_augmented,
    gram_time_closed,
    load_matrix,
    space_matrix,
    time_matrix,
)
from gjf_spectral.errors import DomainError, NonFiniteSampleError
from gjf_spectral.gjf import BasisKind, BasisSet, FracOrders, basis_frac_deriv


def basis(M=8, N=6, T=1.0, sigma_source=1.8):
    return BasisSet(FracOrders(0.5, 1.2, 0.2, sigma_source, 0.5, T), M, N)


def p_sigma_closed(M, sigma):
    """Tridiagonal P_sigma from the Legendre forms L_{i-1} -/+ c_i L_i."""
    n = M - 1
    c = lambda i: (i + sigma) / (i - sigma)
    P = np.zeros((n, n))
    for i in range(1, n + 1):
        P[i - 1, i - 1] = 2.0 / (2 * i - 1) - c(i) ** 2 * 2.0 / (2 * i + 1)
        if i < n:
            P[i - 1, i] = -c(i) * 2.0 / (2 * i + 1)
            P[i, i - 1] = c(i) * 2.0 / (2 * i + 1)
    return P


def test_p_sigma_frozen_entry():
    P = space_matrix(0.9, basis())
    assert P.role is MatrixRole.SPACE_P and P.shape == (7, 7)
    # 2 - 19**2 * 2/3
    assert P.values[0, 0] == pytest.approx(-238.66666666666666, rel=1e-12)


@pytest.mark.parametrize("mu", [1.2, 1.5, 1.8])
def test_p_sigma_is_tridiagonal_closed_form(mu):
    b = basis(M=16, sigma_source=mu)
    np.testing.assert_allclose(space_matrix(b.sigma, b).values, p_sigma_closed(16, b.sigma), atol=1e-11)


@pytest.mark.parametrize("T", [1.0, 2.0, 0.3])
def test_q_s_is_identity(T):
    b = basis(N=12, T=T)
    np.testing.assert_allclose(time_matrix(b.s, b).values, np.eye(12), atol=1e-12)


def test_space_matrix_against_adaptive_quadrature():
    b = basis(M=5)
    rho = 0.55
    P = space_matrix(rho, b).values
    for i in (1, 3):
        for ip in (2, 4):
            f = lambda x: basis_frac_deriv(BasisKind.TRIAL_SPACE, i, rho, b, x) * basis_frac_deriv(
                BasisKind.TEST_SPACE, ip, rho, b, x
            )
            ref, _ = integrate.quad(f, -1, 1, epsabs=1e-13, epsrel=1e-12, limit=200)
            assert P[i - 1, ip - 1] == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_time_matrix_against_adaptive_quadrature():
    b = basis(N=4, T=2.0)
    r = 0.1
    Q = time_matrix(r, b).values
    for j in (1, 2, 4):
        for jp in (1, 3):
            f = lambda t: basis_frac_deriv(BasisKind.TRIAL_TIME, j, r, b, t) * basis_frac_deriv(
                BasisKind.TEST_TIME, jp, r, b, t
            )
            ref, _ = integrate.quad(f, 0, 2.0, epsabs=1e-13, epsrel=1e-12, limit=200)
            assert Q[j - 1, jp - 1] == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_order_range_checks():
    b = basis()
    with pytest.raises(DomainError):
        space_matrix(1.0, b)
    with pytest.raises(DomainError):
        time_matrix(-0.1, b)
    with pytest.raises(DomainError):
        gram_space_closed(0.5, 0, 1, b)
    with pytest.raises(DomainError):
        gram_time_augmented(1.5, 1, 1, b)


def test_gram_closed_forms_structure():
    b = basis(M=10, N=10, T=2.0)
    assert gram_space_closed(0.6, 2, 5, b) == 0.0
    assert gram_time_closed(0.1, 2, 3, b) == 0.0
    assert gram_time_closed(b.s, 4, 4, b) == pytest.approx(1.0)
    # (2/T)**(2l) Gamma(j+l)/Gamma(j-l) at T = 2, j = 3, l = 2: 4!/0! = 24
    assert gram_time_augmented(2, 3, 3, b) == pytest.approx(24.0)
    assert gram_time_augmented(2, 2, 2, b) == 0.0
    assert gram_space_augmented(0, 3, 3, b) == pytest.approx(gram_space_closed(b.sigma, 3, 3, b))
    assert gram_space_closed(0.3, 3, 4, b) == pytest.approx(gram_space_closed(0.3, 4, 3, b))


def test_default_quad_size():
    assert default_quad_size(basis(M=8, N=20)) == 32


def test_load_matrix_against_adaptive_quadrature():
    b = basis(M=5, N=4, T=2.0)
    calls = []

    def f(x, t):
        calls.append((np.shape(x), np.shape(t)))
        return np.cos(x) * (1.0 + t**2)

    F = load_matrix(f, b).values
    assert F.shape == (4, 4) and len(calls) == 1
    assert calls[0][0][1] == 1 and calls[0][1][0] == 1
    for i in (1, 4):
        sx, _ = integrate.quad(lambda x: np.cos(x) * basis_frac_deriv(BasisKind.TEST_SPACE, i, 0.0, b, x), -1, 1)
        for j in (1, 3):
            st, _ = integrate.quad(lambda t: (1 + t**2) * basis_frac_deriv(BasisKind.TEST_TIME, j, 0.0, b, t), 0, 2)
            assert F[i - 1, j - 1] == pytest.approx(sx * st, rel=1e-9, abs=1e-12)


def test_load_matrix_errors():
    b = basis()
    with pytest.raises(NonFiniteSampleError):
        load_matrix(lambda x, t: np.where(x < -0.999, np.nan, 1.0) + 0 * t, b)
    with pytest.raises(DomainError):
        load_matrix(lambda x, t: x + t, b, quad_size=1)
