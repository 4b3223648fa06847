import numpy as np
import pytest

from gjf_spectral.analysis import l2_error
from gjf_spectral.assembly import LoadMatrix, MatrixRole, OperatorMatrix, load_matrix
from gjf_spectral.errors import DomainError, SingularSystemError
from gjf_spectral.gjf import BasisSet, FracOrders
from gjf_spectral.oracle import ProblemSpec, exact_function, manufactured_source
from gjf_spectral.solver import (
    CoeffMatrix,
    assemble,
    build_system,
    evaluate,
    evaluate_frac_deriv,
    evaluate_grid,
    solve,
    solve_problem,
    stack,
    unstack,
)

ORDERS = FracOrders(0.5, 1.2, 0.2, 1.8, eps=0.8, T=1.5)


def test_stack_is_column_major():
    U = np.arange(6.0).reshape(3, 2)
    v = stack(U)
    assert v[1] == U[1, 0] and v[3] == U[0, 1]
    np.testing.assert_array_equal(unstack(v, 3, 2), U)


def test_kronecker_matches_two_sided_products():
    rng = np.random.default_rng(1)
    system = assemble(BasisSet(ORDERS, 7, 5))
    U = rng.standard_normal((6, 5))
    np.testing.assert_allclose(system.matrix @ stack(U), stack(system.apply(U)), rtol=1e-12, atol=1e-10)
    assert system.matrix.shape == (30, 30) and system.eps == 0.8


def test_plant_and_recover():
    rng = np.random.default_rng(7)
    b = BasisSet(ORDERS, 9, 6)
    system = assemble(b)
    U = rng.uniform(-1, 1, (8, 6))
    u = solve(system, LoadMatrix(system.apply(U)))
    np.testing.assert_allclose(u.values, U, atol=1e-10)
    assert u.residual < 1e-10 and 1.0 < u.condition < 1e8
    assert u.basis is b


def test_singular_system_detected():
    z = lambda n, role: OperatorMatrix(np.zeros((n, n)), role, 0.0)
    sys_ = build_system(
        z(3, MatrixRole.SPACE_P), z(3, MatrixRole.SPACE_P), z(3, MatrixRole.SPACE_P),
        z(2, MatrixRole.TIME_Q), z(2, MatrixRole.TIME_Q), z(2, MatrixRole.TIME_Q), 0.0,
    )
    with pytest.raises(SingularSystemError) as err:
        solve(sys_, LoadMatrix(np.ones((3, 2))), BasisSet(ORDERS, 4, 2))
    assert err.value.condition == float("inf")


def test_shape_validation():
    b = BasisSet(ORDERS, 5, 3)
    system = assemble(b)
    with pytest.raises(DomainError):
        solve(system, LoadMatrix(np.ones((3, 3))))
    system.basis = None
    with pytest.raises(DomainError):
        solve(system, LoadMatrix(np.ones((4, 3))))
    with pytest.raises(DomainError):
        CoeffMatrix(np.ones((2, 2)), b)
    with pytest.raises(DomainError):
        CoeffMatrix(np.full((4, 3), np.nan), b)
    P = OperatorMatrix(np.eye(4), MatrixRole.SPACE_P, 0.0)
    Q = OperatorMatrix(np.eye(3), MatrixRole.TIME_Q, 0.0)
    with pytest.raises(DomainError):
        build_system(P, P, P, Q, Q, P, 0.0)


def test_evaluation_helpers():
    rng = np.random.default_rng(3)
    b = BasisSet(ORDERS, 6, 4)
    u = CoeffMatrix(rng.standard_normal((5, 4)), b)
    x = np.linspace(-1, 1, 7)
    t = np.linspace(0, 1.5, 5)
    grid = evaluate_grid(u, x, t)
    assert grid.shape == (7, 5)
    np.testing.assert_allclose(evaluate(u, x[:, None], t[None, :]), grid, atol=1e-13)
    assert isinstance(evaluate(u, 0.1, 0.7), float)
    np.testing.assert_allclose(grid[0], 0.0, atol=1e-12)
    np.testing.assert_allclose(grid[-1], 0.0, atol=1e-12)
    np.testing.assert_allclose(grid[:, 0], 0.0, atol=1e-12)
    d = evaluate_grid(u, x[1:-1], t[1:], r=0.25, rho=0.9)
    np.testing.assert_allclose(evaluate_frac_deriv(u, 0.25, 0.9, x[1:-1, None], t[None, 1:]), d, atol=1e-12)


def test_tp1_small_solve_is_spectrally_accurate():
    spec = ProblemSpec.preset("tp1")
    u = solve_problem(BasisSet(spec.orders, 12, 12), manufactured_source(spec))
    # verified value 5.6e-13
    assert l2_error(u, exact_function(spec)) < 5e-12


def test_quad_size_override_changes_nothing_when_resolved():
    spec = ProblemSpec.preset("tp1")
    b = BasisSet(spec.orders, 10, 10)
    f = manufactured_source(spec)
    a = solve(assemble(b), load_matrix(f, b))
    c = solve(assemble(b), load_matrix(f, b, quad_size=40))
    np.testing.assert_allclose(a.values, c.values, atol=1e-12)
