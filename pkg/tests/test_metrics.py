import numpy as np
import pytest

from fpg.derivatives import EvalPoint, euler_degree
from fpg.errors import DomainError, HomogeneityError, SingularMetric
from fpg.fixtures import M_EUC, M_MINK, M_RAND, M_SPH, P0, sphere_christoffel
from fpg.metrics import (
    ExplicitSpray,
    canonical_spray,
    custom,
    energy,
    fundamental_tensor,
    randers,
    register_spray,
    spray_euler_degrees,
)
from fpg.oracle import fd_derivative
from fpg.sampling import WorkingDomain, sample_points


def test_energy_examples():
    assert energy(M_EUC, EvalPoint((0, 0, 0), (3, 4, 0))) == 12.5
    x, y = P0.xa, P0.ya
    direct = 0.5 * 4.0 / (1 + x @ x) ** 2 * (y @ y)
    assert energy(M_SPH, P0) == pytest.approx(direct, rel=1e-14)
    for m in (M_EUC, M_SPH, M_RAND, M_MINK):
        assert euler_degree(m.energy, P0) == pytest.approx(2.0, abs=1e-12)


def test_fundamental_tensor_euclidean():
    ft = fundamental_tensor(M_EUC, P0)
    assert np.array_equal(ft.g.components, np.eye(3))
    assert ft.cond == pytest.approx(1.0)


def test_fundamental_tensor_randers_vs_fd():
    ft = fundamental_tensor(M_RAND, P0)
    g = ft.g.components
    assert np.allclose(g, g.T)
    assert np.linalg.eigvalsh(g).min() > 0
    e = np.eye(6)
    fd = np.array([[fd_derivative(M_RAND.energy, P0, [e[3 + i], e[3 + j]]) for j in range(3)] for i in range(3)])
    assert np.max(np.abs(fd - g)) <= 1e-6 * np.max(np.abs(g))
    assert np.allclose(ft.inverse @ g, np.eye(3))


def test_riemannian_g_independent_of_y():
    g1 = fundamental_tensor(M_SPH, P0).g.components
    g2 = fundamental_tensor(M_SPH, EvalPoint(P0.x, (0.3, -2.0, 5.0))).g.components
    assert np.allclose(g1, g2, rtol=1e-14)


def test_singular_metric():
    degenerate = custom(3, lambda x, y: y[0])
    with pytest.raises(SingularMetric):
        fundamental_tensor(degenerate, P0)


def test_canonical_spray_examples(p0):
    assert np.array_equal(canonical_spray(M_EUC).value(p0), np.zeros(3))
    assert np.abs(canonical_spray(M_MINK).value(p0)).max() == 0.0
    gam = np.array(sphere_christoffel(p0.x))
    expected = 0.5 * np.einsum("ijk,j,k->i", gam, p0.ya, p0.ya)
    assert np.allclose(canonical_spray(M_SPH).value(p0), expected, rtol=0, atol=1e-14)


def test_spray_homogeneity_20_points():
    pts = sample_points(WorkingDomain.cube(3), 20, 5)
    for m in (M_SPH, M_RAND):
        s = canonical_spray(m)
        for p in pts:
            for d in spray_euler_degrees(s, p):
                assert d is None or abs(d - 2.0) <= 1e-7


def test_euclidean_geodesic_residual():
    # x(t) = a + t v: x'' + 2 G(x, x') = 0
    s = canonical_spray(M_EUC)
    for t in np.linspace(-0.3, 0.3, 5):
        p = EvalPoint(tuple(np.array([0.1, 0.0, -0.2]) + t * np.array([1.0, 2.0, -1.0])), (1.0, 2.0, -1.0))
        assert np.abs(2 * s.value(p)).max() <= 1e-10


def test_sphere_geodesic_residual():
    # great circle through the origin along e1: x1(t) = tan(t/2), x2 = x3 = 0
    s = canonical_spray(M_SPH)
    for t in (0.1, 0.4, 0.8):
        x1 = np.tan(t / 2)
        v = 0.5 / np.cos(t / 2) ** 2
        a = 0.5 * np.tan(t / 2) / np.cos(t / 2) ** 2
        p = EvalPoint((x1, 0.0, 0.0), (v, 0.0, 0.0))
        assert abs(a + 2 * s.value(p)[0]) <= 1e-12


def test_g_eta_eta_is_L_squared():
    pts = sample_points(WorkingDomain.cube(3), 20, 9)
    for m in (M_EUC, M_SPH, M_RAND, M_MINK):
        for p in pts:
            g = fundamental_tensor(m, p).g.components
            L = m.L(p.x, p.y)
            assert p.ya @ g @ p.ya == pytest.approx(L * L, rel=1e-9)


def test_randers_convexity_guard():
    one, zero = (lambda x, y: 1.0), (lambda x, y: 0.0)
    a = [[one if i == j else zero for j in range(3)] for i in range(3)]
    with pytest.raises(DomainError):
        randers(3, a, [lambda x, y: 2.0, zero, zero])


def test_explicit_spray_gate():
    ok = ExplicitSpray(3, [lambda x, y: x[0] * y[1] * y[2], lambda x, y: 0.0, lambda x, y: y[0] ** 2])
    register_spray(ok)
    bad = ExplicitSpray(3, [lambda x, y: y[0] ** 3, lambda x, y: 0.0, lambda x, y: 0.0])
    with pytest.raises(HomogeneityError):
        register_spray(bad)
