import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from gjf_spectral.errors import DomainError, NonFiniteSampleError
from gjf_spectral.quadrature import (
    RuleKind,
    integrate,
    jacobi_gauss,
    jacobi_gauss_lobatto,
    jacobi_gauss_radau,
    jacobi_moment,
    map_to_interval,
)

params = st.floats(-0.9, 2.0)


def _moment_error(rule, degree, a, b):
    worst = 0.0
    for k in range(degree + 1):
        exact = jacobi_moment(k, a, b)
        got = float(rule.weights @ rule.nodes**k)
        worst = max(worst, abs(got - exact) / max(1.0, abs(exact)))
    return worst


def test_moments_closed_form():
    assert jacobi_moment(0, 0.0, 0.0) == pytest.approx(2.0)
    assert jacobi_moment(2, 0.0, 0.0) == pytest.approx(2.0 / 3.0)
    assert jacobi_moment(1, 1.0, 0.0) == pytest.approx(-2.0 / 3.0)


def test_gauss_matches_scipy():
    for n, a, b in [(5, 0.0, 0.0), (12, -0.4, 0.7), (30, 0.9, 0.9)]:
        x, w = special.roots_jacobi(n, a, b)
        rule = jacobi_gauss(n, a, b)
        np.testing.assert_allclose(rule.nodes, x, atol=1e-13)
        np.testing.assert_allclose(rule.weights, w, rtol=1e-11)
        assert rule.kind is RuleKind.GAUSS and len(rule) == n


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 20), a=params, b=params)
def test_exactness_degrees(n, a, b):
    assert _moment_error(jacobi_gauss(n, a, b), 2 * n - 1, a, b) < 1e-12
    assert _moment_error(jacobi_gauss_radau(n, a, b, "left"), 2 * n - 2, a, b) < 1e-12
    assert _moment_error(jacobi_gauss_radau(n, a, b, "right"), 2 * n - 2, a, b) < 1e-12
    assert _moment_error(jacobi_gauss_lobatto(n, a, b), 2 * n - 3, a, b) < 1e-12


def test_pinned_nodes():
    r = jacobi_gauss_radau(7, 0.3, 0.0, "left")
    assert r.nodes[0] == -1.0 and r.kind is RuleKind.RADAU_LEFT
    r = jacobi_gauss_radau(7, 0.3, 0.0, "right")
    assert r.nodes[-1] == 1.0
    r = jacobi_gauss_lobatto(7, 0.9, 0.0)
    assert r.nodes[0] == -1.0 and r.nodes[-1] == 1.0
    assert np.all(np.diff(r.nodes) > 0) and np.all(r.weights > 0)
    two = jacobi_gauss_lobatto(2, 0.5, 0.0)
    assert float(two.weights.sum()) == pytest.approx(jacobi_moment(0, 0.5, 0.0))


def test_rules_are_read_only():
    r = jacobi_gauss(4, 0.0, 0.0)
    with pytest.raises(ValueError):
        r.nodes[0] = 0.0


def test_map_and_integrate():
    r = map_to_interval(jacobi_gauss(6, 0.0, 0.0), 0.0, 3.0)
    assert integrate(r, lambda t: t**3) == pytest.approx(81.0 / 4.0, rel=1e-14)
    lob = map_to_interval(jacobi_gauss_lobatto(5, 0.0, 0.0), 1.0, 2.0)
    assert lob.nodes[0] == 1.0 and lob.nodes[-1] == 2.0 and (lob.lo, lob.hi) == (1.0, 2.0)
    with pytest.raises(DomainError):
        map_to_interval(r, 1.0, 1.0)
    with pytest.raises(NonFiniteSampleError):
        integrate(jacobi_gauss(3, 0.0, 0.0), lambda x: np.full_like(x, np.nan))


def test_rule_domain_errors():
    with pytest.raises(DomainError):
        jacobi_gauss(0, 0.0, 0.0)
    with pytest.raises(DomainError):
        jacobi_gauss(300, 0.0, 0.0)
    with pytest.raises(DomainError):
        jacobi_gauss_radau(1, 0.0, 0.0)
    with pytest.raises(DomainError):
        jacobi_gauss_radau(4, 0.0, 0.0, fixed="middle")
    with pytest.raises(DomainError):
        jacobi_gauss(4, -1.0, 0.0)
