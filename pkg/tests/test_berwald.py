import threading

import numpy as np
import pytest

from fpg import berwald as bw
from fpg.berwald import Berwald
from fpg.errors import DimensionError
from fpg.fixtures import M_SPH, P0, sphere_christoffel
from fpg.metrics import ExplicitSpray, fundamental_tensor
from fpg.oracle import fd_derivative
from fpg.tensor import relative_residual


@pytest.fixture(scope="module")
def gam():
    return np.array(sphere_christoffel(P0.x))


def test_nonlinear_connection(sprays, gam, p0):
    assert np.abs(bw.nonlinear_connection(sprays["euclidean"], p0).components).max() == 0
    N = bw.nonlinear_connection(sprays["sphere"], p0).components
    assert np.allclose(N, np.einsum("ijk,k->ij", gam, p0.ya), atol=1e-14)
    for s in sprays.values():
        N = bw.nonlinear_connection(s, p0).components
        G = Berwald(s, p0).G.value
        assert relative_residual(N @ p0.ya, 2 * G) <= 1e-13


def test_berwald_coefficients(sprays, gam, p0):
    assert np.abs(bw.berwald_coefficients(sprays["euclidean"], p0).components).max() == 0
    t = bw.berwald_coefficients(sprays["sphere"], p0)
    assert np.allclose(t.components, gam, atol=1e-14)
    other = bw.berwald_coefficients(sprays["sphere"], type(p0)(p0.x, (2.0, -1.0, 0.5))).components
    assert np.allclose(other, gam, atol=1e-14)
    for s in sprays.values():
        assert bw.berwald_coefficients(s, p0).symmetry_residual() <= 1e-12


def test_hv_curvature(sprays, p0):
    assert np.abs(bw.hv_curvature(sprays["sphere"], p0).components).max() == 0
    ap = Berwald(sprays["randers"], p0)
    P = bw.hv_curvature(sprays["randers"], p0)
    assert P.norm() > 1e-3
    assert P.symmetry_residual() <= 1e-10
    assert ap.euler_residual(ap.P, -1) <= 1e-10
    assert np.abs(P.components @ p0.ya).max() <= 1e-12


def test_v_curvature_placeholder(sprays, p0):
    assert bw.v_curvature_is_zero(sprays["sphere"], p0) == 0
    assert bw.v_curvature_is_zero(sprays["randers"], p0) == 0


def test_deviation_tensor(sprays, p0):
    assert np.abs(bw.deviation_tensor(sprays["euclidean"], p0).components).max() == 0
    H = bw.deviation_tensor(sprays["sphere"], p0).components
    g = fundamental_tensor(M_SPH, p0).g.components
    y = p0.ya
    expected = (y @ g @ y) * np.eye(3) - np.outer(y, g @ y)
    assert relative_residual(H, expected) <= 1e-12
    for s in sprays.values():
        assert np.abs(bw.deviation_tensor(s, p0).components @ y).max() <= 1e-12


def test_vh_torsion(sprays, p0):
    assert np.abs(bw.vh_torsion(sprays["euclidean"], p0).components).max() == 0
    for name in ("sphere", "randers"):
        s = sprays[name]
        ap = Berwald(s, p0)
        R = bw.vh_torsion(s, p0)
        assert R.symmetry_residual() <= 1e-12
        dH = ap.vgrad(ap.H).value
        assert relative_residual(R.components, (dH.transpose(0, 2, 1) - dH) / 3) <= 1e-8
        assert relative_residual(np.einsum("j,ijk->ik", p0.ya, R.components), ap.H.value) <= 1e-12
    # sphere: Rhat^i_jk = g_jm y^m d^i_k - g_km y^m d^i_j
    g = fundamental_tensor(M_SPH, p0).g.components
    gy = g @ p0.ya
    d = np.eye(3)
    expected = np.einsum("j,ik->ijk", gy, d) - np.einsum("k,ij->ijk", gy, d)
    assert relative_residual(bw.vh_torsion(sprays["sphere"], p0).components, expected) <= 1e-12


def test_h_curvature(sprays, points20, p0):
    assert np.abs(bw.h_curvature(sprays["euclidean"], p0).components).max() == 0
    for name in ("sphere", "randers"):
        for p in points20:
            R = bw.h_curvature(sprays[name], p).components
            cyc = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
            assert relative_residual(cyc, 0) <= 1e-8
        R = bw.h_curvature(sprays[name], p0).components
        assert relative_residual(R @ p0.ya, bw.vh_torsion(sprays[name], p0).components) <= 1e-12


def test_traces(sprays, p0):
    for s in sprays.values():
        theta, R2, R1, k = bw.traces(s, p0)
        assert relative_residual(theta.components, R2.components - R2.components.T) <= 1e-12
        assert relative_residual(R1.components @ p0.ya, 4 * k.components) <= 1e-12
    for t in bw.traces(sprays["euclidean"], p0):
        assert t.norm() == 0


def test_traces_need_n3():
    s2 = ExplicitSpray(2, [lambda x, y: x[0] * y[0] * y[1], lambda x, y: y[1] ** 2])
    p = type(P0)((0.1, 0.2), (1.0, 0.5))
    with pytest.raises(DimensionError):
        bw.traces(s2, p)
    bw.vh_torsion(s2, p)  # lower tensors are fine in dimension 2


def test_omega_and_p(sprays, gam, p0):
    for s in sprays.values():
        ap = Berwald(s, p0)
        omega, p = bw.omega_and_p(s, p0)
        assert p.symmetry_residual() <= 1e-12
        assert np.abs(p.components @ p0.ya).max() <= 1e-12
        assert relative_residual(p.components, ap.vgrad(ap.omega).value) <= 1e-10
    omega, p = bw.omega_and_p(sprays["sphere"], p0)
    assert np.abs(p.components).max() == 0
    assert np.allclose(omega.components, np.einsum("mmj->j", gam), atol=1e-14)


def test_against_finite_differences(sprays, p0):
    # N and Gijk from finite differences of the spray computed by the jet pipeline at shifted points
    s = sprays["randers"]
    G = lambda x, y: Berwald(s, type(p0)(x, y)).G.value  # noqa: E731
    e = np.eye(6)
    N_fd = np.stack([fd_derivative(G, p0, [e[3 + j]]) for j in range(3)], axis=1)
    assert relative_residual(N_fd, bw.nonlinear_connection(s, p0).components) <= 1e-5
    Rhat = bw.vh_torsion(s, p0).components
    Nf = lambda x, y: Berwald(s, type(p0)(x, y)).N.value  # noqa: E731
    dxN = np.stack([fd_derivative(Nf, p0, [e[k]]) for k in range(3)], axis=-1)  # [i, j, k]
    dyN = np.stack([fd_derivative(Nf, p0, [e[3 + m]]) for m in range(3)], axis=-1)  # [i, j, m]
    N = bw.nonlinear_connection(s, p0).components
    deltaN = dxN - np.einsum("ijm,mk->ijk", dyN, N)
    assert relative_residual(deltaN - deltaN.transpose(0, 2, 1), Rhat) <= 1e-5


def test_memo_is_thread_safe(sprays, p0):
    ap = Berwald(sprays["randers"], p0)
    results = []

    def work():
        results.append(ap.Rc)

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r is results[0] for r in results)


def test_apparatus_cache_reuses(sprays, p0):
    assert bw.apparatus(sprays["sphere"], p0) is bw.apparatus(sprays["sphere"], p0)
