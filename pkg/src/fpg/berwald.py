"""Berwald apparatus of a spray at a point.

Every tensor is kept as a Taylor jet around the point, so fiber partials of
derived tensors (the vertical Berwald derivative acts on components as
``d/dy^m``) are exact coefficient shifts.

Index conventions (array axes, contravariant index first):

* ``N[i, j] = dG^i/dy^j``, ``Gijk[i, j, k]``, ``P[i, j, k, l] = d^3 G^i``;
* ``delta_k = d/dx^k - N^m_k d/dy^m``;
* ``Rhat[i, j, k] = delta_k N^i_j - delta_j N^i_k`` (antisymmetric in j, k);
* ``H[i, k] = y^j Rhat[i, j, k]``;
* ``Rc[i, j, k, m] = d Rhat[i, j, k] / dy^m`` (the h-curvature R°(X_j, Y_k) Z_m);
* ``theta[j, k] = Rc[m, j, k, m]``, ``R2[j, k] = Rc[m, j, m, k]``;
* ``omega[j] = Gijk[m, m, j]``, ``p[j, k] = P[m, j, k, m]``.

With this sign of ``Rhat`` one has ``H = Rhat(eta, .)`` and
``Rhat = (dH_k/dy^j - dH_j/dy^k) / 3``, which pins it.
"""

from __future__ import annotations

import threading
from collections import OrderedDict

import numpy as np

from .derivatives import EvalPoint, taylor_coordinates
from .errors import DimensionError
from .jet import Basis, Jet, contract, stack
from .metrics import Spray
from .tensor import TensorValue

#: (y-order, x-order) to which the spray jet must be exact for the whole apparatus.
SPRAY_ORDER = (5, 1)


class Berwald:
    """Lazily evaluated, memoized curvature apparatus of ``spray`` at ``point``."""

    def __init__(self, spray: Spray, point: EvalPoint, basis: Basis | None = None):
        if point.n != spray.n:
            raise DimensionError(f"spray has dimension {spray.n}, point has {point.n}")
        self.spray = spray
        self.point = point
        self.n = spray.n
        self.basis = basis or spray.basis_for(*SPRAY_ORDER)
        self._lock = threading.RLock()
        self._cache: dict = {}
        xs, ys = taylor_coordinates(self.basis, point)
        self.xs, self.ys = xs, ys
        self.y = stack(ys)
        self.delta_ij = np.eye(self.n)

    def memo(self, key, thunk):
        """Compute ``thunk()`` once; concurrent callers wait for the first result."""
        with self._lock:
            if key not in self._cache:
                self._cache[key] = thunk()
            return self._cache[key]

    # derivative helpers -------------------------------------------------
    def vgrad(self, t: Jet) -> Jet:
        """Append a covariant axis ``m`` holding ``dt/dy^m``."""
        return stack([t.diff(self.n + m) for m in range(self.n)], axis=-1)

    def xgrad(self, t: Jet) -> Jet:
        return stack([t.diff(m) for m in range(self.n)], axis=-1)

    def delta(self, t: Jet) -> Jet:
        """Append a covariant axis ``k`` holding ``delta_k t``."""
        return self.xgrad(t) - contract("...m,mk->...k", self.vgrad(t), self.N)

    def scalar(self, fn) -> Jet:
        """A scalar field ``fn(x, y)`` as a jet on this basis."""
        out = fn(self.xs, self.ys)
        return out if isinstance(out, Jet) else Jet.constant(self.basis, out)

    def require_n3(self) -> None:
        if self.n <= 2:
            raise DimensionError(f"this tensor needs dimension n > 2, got {self.n}")

    # spray-level tensors ------------------------------------------------
    @property
    def G(self) -> Jet:
        return self.memo("G", lambda: self.spray.jet(self.basis, self.point))

    @property
    def N(self) -> Jet:
        return self.memo("N", lambda: self.vgrad(self.G))

    @property
    def Gijk(self) -> Jet:
        return self.memo("Gijk", lambda: self.vgrad(self.N))

    @property
    def P(self) -> Jet:
        return self.memo("P", lambda: self.vgrad(self.Gijk))

    def _rhat(self) -> Jet:
        dN = self.delta(self.N)
        return dN - dN.swapaxes(1, 2)

    @property
    def Rhat(self) -> Jet:
        return self.memo("Rhat", self._rhat)

    @property
    def H(self) -> Jet:
        return self.memo("H", lambda: contract("ijk,j->ik", self.Rhat, self.y))

    @property
    def Rc(self) -> Jet:
        return self.memo("Rc", lambda: self.vgrad(self.Rhat))

    @property
    def theta(self) -> Jet:
        return self.memo("theta", lambda: self.Rc.einsum("mjkm->jk"))

    @property
    def R2(self) -> Jet:
        return self.memo("R2", lambda: self.Rc.einsum("mjmk->jk"))

    @property
    def R1(self) -> Jet:
        def build():
            self.require_n3()
            n = self.n
            a = contract("jk,k->j", self.R2, self.y)
            b = contract("kj,k->j", self.R2, self.y)
            return (n * a + b) * (1.0 / (n - 1))

        return self.memo("R1", build)

    @property
    def k(self) -> Jet:
        def build():
            self.require_n3()
            return contract("j,j->", contract("jk,k->j", self.R2, self.y), self.y) * (1.0 / (self.n - 1))

        return self.memo("k", build)

    @property
    def omega(self) -> Jet:
        return self.memo("omega", lambda: self.Gijk.einsum("mmj->j"))

    @property
    def p(self) -> Jet:
        return self.memo("p", lambda: self.P.einsum("mjkm->jk"))

    # conversion -----------------------------------------------------------
    def tensor(self, name: str, jet: Jet, slots, convention: str, symmetries=()) -> TensorValue:
        return TensorValue(name, np.asarray(jet.value), tuple(slots), convention, self.point, tuple(symmetries))

    def euler_residual(self, t: Jet, degree: float) -> float:
        """Relative residual of ``y^m dt/dy^m = degree * t``."""
        from .tensor import relative_residual

        lhs = contract("...m,m->...", self.vgrad(t), self.y).value
        return relative_residual(lhs, degree * np.asarray(t.value))


# process-wide bounded memo of apparatus objects ------------------------------

_CACHE_SIZE = 16
_cache: OrderedDict = OrderedDict()
_cache_lock = threading.Lock()


def apparatus(spray: Spray, point: EvalPoint) -> Berwald:
    """Shared :class:`Berwald` for ``(spray, point)`` (bounded LRU, thread-safe)."""
    key = (spray, point)  # sprays hash by identity; the key keeps them alive
    with _cache_lock:
        hit = _cache.get(key)
        if hit is not None:
            _cache.move_to_end(key)
            return hit
        ap = Berwald(spray, point)
        _cache[key] = ap
        if len(_cache) > _CACHE_SIZE:
            _cache.popitem(last=False)
        return ap


# public operations -------------------------------------------------------------


def nonlinear_connection(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor("N", ap.N, ("contra", "co"), "N[i, j] = dG^i/dy^j")


def berwald_coefficients(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "Gijk", ap.Gijk, ("contra", "co", "co"), "Gijk[i, j, k] = d2G^i/dy^j dy^k", (((1, 2), 1),)
    )


def hv_curvature(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "P", ap.P, ("contra", "co", "co", "co"),
        "P[i, j, k, l] = P°(X_j, Y_k) Z_l = d3G^i/dy^j dy^k dy^l", (((1, 2, 3), 1),),
    )


def v_curvature_is_zero(s: Spray, p: EvalPoint) -> float:
    """The v-curvature of the Berwald connection.

    Vertical connection coefficients vanish in induced coordinates, so the
    v-curvature is identically zero in this realization.
    """
    return 0.0


def vh_torsion(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "Rhat", ap.Rhat, ("contra", "co", "co"),
        "Rhat[i, j, k] = delta_k N^i_j - delta_j N^i_k", (((1, 2), -1),),
    )


def deviation_tensor(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor("H", ap.H, ("contra", "co"), "H[i, k] = y^j Rhat[i, j, k]")


def h_curvature(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "Rc", ap.Rc, ("contra", "co", "co", "co"),
        "Rc[i, j, k, m] = R°(X_j, Y_k) Z_m = dRhat[i, j, k]/dy^m", (((1, 2), -1),),
    )


def traces(s: Spray, p: EvalPoint) -> tuple:
    """``(theta, R2, R1, k)``; needs ``n > 2``."""
    ap = apparatus(s, p)
    ap.require_n3()
    return (
        ap.tensor("theta", ap.theta, ("co", "co"), "theta[j, k] = Rc[m, j, k, m]", (((0, 1), -1),)),
        ap.tensor("R2", ap.R2, ("co", "co"), "R2[j, k] = Rc[m, j, m, k]"),
        ap.tensor("R1", ap.R1, ("co",), "R1[j] = (n R2[j, k] y^k + y^k R2[k, j]) / (n - 1)"),
        ap.tensor("k", ap.k, (), "k = y^j y^k R2[j, k] / (n - 1)"),
    )


def omega_and_p(s: Spray, p: EvalPoint) -> tuple:
    ap = apparatus(s, p)
    return (
        ap.tensor("omega", ap.omega, ("co",), "omega[j] = Gijk[m, m, j]"),
        ap.tensor("p", ap.p, ("co", "co"), "p[j, k] = P[m, j, k, m]", (((0, 1), 1),)),
    )
