import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fpg import jet
from fpg.derivatives import EvalPoint, directional_derivative, euler_degree
from fpg.errors import ArityError, DimensionError, DomainError, TruncationError
from fpg.fixtures import M_EUC, M_SPH, P0, lambda_lin
from fpg.jet import Basis, Jet, contract, inv, stack
from fpg.oracle import fd_derivative


def unit(i, m=6):
    e = np.zeros(m)
    e[i] = 1.0
    return e


def test_bilinear():
    f = lambda x, y: y[0] * y[1]
    assert directional_derivative(f, P0, [unit(3), unit(4)]) == 1.0


def test_cubic():
    f = lambda x, y: x[0] ** 3
    assert directional_derivative(f, P0, [unit(0)] * 3) == pytest.approx(6.0, abs=1e-14)


def test_sphere_energy_vs_fd():
    jv = directional_derivative(M_SPH.energy, P0, [unit(3)])
    fv = fd_derivative(M_SPH.energy, P0, [unit(3)])
    assert abs(jv - fv) <= 1e-8 * abs(jv)


def test_arity_and_dimension():
    f = lambda x, y: x[0]
    with pytest.raises(ArityError):
        directional_derivative(f, P0, [unit(0)] * 7)
    with pytest.raises(ArityError):
        directional_derivative(f, P0, [])
    with pytest.raises(DimensionError):
        directional_derivative(f, P0, [np.ones(4)])
    assert directional_derivative(f, P0, [unit(0)] * 7, max_depth=7) == 0.0


def test_domain_errors():
    b = Basis.hyperdual(1)
    z = Jet.variable(b, 0.0, [1.0])
    with pytest.raises(DomainError):
        jet.reciprocal(z)
    with pytest.raises(DomainError):
        jet.sqrt(z - 1.0)
    with pytest.raises(DomainError):
        directional_derivative(lambda x, y: 1.0 / (x[0] - 0.1), P0, [unit(0)])


def test_euler_examples():
    assert euler_degree(M_EUC.L, P0) == pytest.approx(1.0, abs=1e-14)
    assert euler_degree(M_SPH.energy, P0) == pytest.approx(2.0, abs=1e-14)
    assert euler_degree(lambda_lin().fn, P0) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(DomainError):
        euler_degree(lambda x, y: y[0] - 1.0, P0)


def test_evalpoint_rejects_zero_fiber():
    with pytest.raises(DomainError):
        EvalPoint((0, 0, 0), (0, 0, 0))
    with pytest.raises(DimensionError):
        EvalPoint((0, 0), (1, 0, 0))


# symbolic comparison on the Taylor basis ------------------------------------------

X = sp.symbols("x1:4")
Y = sp.symbols("y1:4")


def _taylor_check(expr_sym, fn, order=6, x_order=2):
    basis = Basis.taylor(3, order, x_order)
    from fpg.derivatives import taylor_coordinates

    xs, ys = taylor_coordinates(basis, P0)
    J = fn(xs, ys)
    subs = dict(zip(X + Y, P0.x + P0.y))
    worst = 0.0
    for e in basis.exponents:
        if sum(e[:3]) > x_order:
            continue
        sym = expr_sym
        for v, k in zip(X + Y, e):
            if k:
                sym = sp.diff(sym, v, k)
        exact = float(sym.subs(subs))
        got = J.partial(e)
        worst = max(worst, abs(got - exact) / (1 + abs(exact)))
    return worst


def test_polynomial_exact_to_order_6():
    sym = X[0] ** 2 * Y[0] ** 3 * Y[1] - 3 * X[1] * Y[2] ** 5 + Y[0] * Y[1] * Y[2] ** 4 + 2
    fn = lambda x, y: x[0] ** 2 * y[0] ** 3 * y[1] - 3 * x[1] * y[2] ** 5 + y[0] * y[1] * y[2] ** 4 + 2
    assert _taylor_check(sym, fn) <= 1e-13


def test_transcendental_composition():
    sym = sp.sqrt(Y[0] ** 2 + Y[1] ** 2 + Y[2] ** 2) * sp.exp(X[0] * Y[1] / 3) + sp.atan(Y[2] + X[1]) \
        - sp.log(2 + sp.sin(Y[0]) * sp.cos(X[2]))
    from fpg import primitives as pm

    def fn(x, y):
        return pm.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2) * pm.exp(x[0] * y[1] / 3) + pm.atan(y[2] + x[1]) \
            - pm.log(2 + pm.sin(y[0]) * pm.cos(x[2]))

    assert _taylor_check(sym, fn, order=5, x_order=1) <= 1e-11


def test_matrix_inverse_jet():
    basis = Basis.taylor(3, 4, 1)
    from fpg.derivatives import taylor_coordinates

    xs, ys = taylor_coordinates(basis, P0)
    m = stack([stack([ys[0] * ys[0] + 2.0, xs[1] * ys[2]]), stack([ys[1], 3.0 + xs[0]])])
    prod = contract("ij,jk->ik", m, inv(m))
    assert np.allclose(prod.coef[0], np.eye(2))
    assert np.abs(prod.coef[1:]).max() < 1e-13


def test_truncation_is_loud():
    basis = Basis.taylor(3, 2, 1)
    from fpg.derivatives import taylor_coordinates

    xs, ys = taylor_coordinates(basis, P0)
    f = ys[0] * ys[1] * ys[2]
    g = f.diff(3).diff(4).diff(5)
    with pytest.raises(TruncationError):
        g.value


@settings(max_examples=40, deadline=None)
@given(
    coeffs=st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    perm=st.permutations([0, 1, 2]),
)
def test_mixed_partials_commute(coeffs, perm):
    a, b, c, d = coeffs

    def f(x, y):
        return a * x[0] * y[0] ** 2 * y[1] + b * y[1] ** 3 * x[2] + c * y[0] * y[1] * y[2] + d * x[1] ** 2 * y[2]

    dirs = [unit(0), unit(3), unit(4)]
    ref = directional_derivative(f, P0, dirs)
    got = directional_derivative(f, P0, [dirs[i] for i in perm])
    assert abs(ref - got) <= 1e-12 * (1 + abs(ref))


def test_order_independent_random_dirs():
    rng = np.random.default_rng(3)
    f = lambda x, y: M_SPH.energy(x, y) * (1 + x[0] * y[1])
    for _ in range(5):
        dirs = list(rng.normal(size=(3, 6)))
        vals = [directional_derivative(f, P0, list(p)) for p in itertools.permutations(dirs)]
        assert max(vals) - min(vals) <= 1e-12 * (1 + max(abs(v) for v in vals))


def test_binom_and_ipow():
    b = Basis.hyperdual(2)
    t = Jet.variable(b, 2.0, [1.0, 1.0])
    r = jet.ipow(t, -3)
    # d2/dt2 of t^-3 at 2 is 12 * 2^-5
    assert r.coefficient((1, 1)) == pytest.approx(12 * 2 ** -5)
    assert math.isclose(jet.ipow(t, 0).value, 1.0)
