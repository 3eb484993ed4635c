"""Projective changes of sprays and the projectively invariant tensors.

A projective change replaces ``G^i`` by ``G^i + lambda y^i`` with ``lambda``
positively homogeneous of degree 1.  Derived one-forms (on the original
spray's apparatus):

* ``alpha_j = dlambda/dy^j``,
* ``Q_j = delta_j lambda - lambda alpha_j``,
* ``eps[j, k] = dQ_k/dy^j - dQ_j/dy^k``.

Transformation-law checks compute the changed side from scratch on the
changed spray and the predicted side from base tensors plus correction
terms; the two are never simplified into each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .berwald import Berwald, apparatus
from .derivatives import EvalPoint
from .errors import DimensionError
from .jet import Jet, contract, stack
from .metrics import ProjectiveFactor, ProjectiveSpray, Spray, check_factor
from .tensor import TensorValue, relative_residual


def apply_projective_change(s: Spray, lam: ProjectiveFactor) -> ProjectiveSpray:
    """``G~^i = G^i + lambda y^i``; ``lambda`` must pass its Euler gate."""
    if lam.n != s.n:
        raise DimensionError("factor and spray dimensions differ")
    check_factor(lam)
    return ProjectiveSpray(s, lam)


# factor-derived forms ----------------------------------------------------------


@dataclass
class FactorForms:
    lam: Jet
    alpha: Jet  # [j]
    D2alpha: Jet  # [j, k] = d alpha_j / dy^k
    D2D2alpha: Jet  # [j, k, l]
    Q: Jet  # [j]
    dQ: Jet  # [k, m] = dQ_k / dy^m
    eps: Jet  # [j, k]


def factor_forms(ap: Berwald, lam: ProjectiveFactor) -> FactorForms:
    def build():
        L = ap.scalar(lam.fn) if not lam.is_zero else Jet.constant(ap.basis, 0.0)
        alpha = ap.vgrad(L)
        D2 = ap.vgrad(alpha)
        Q = ap.delta(L) - L * alpha
        dQ = ap.vgrad(Q)
        return FactorForms(L, alpha, D2, ap.vgrad(D2), Q, dQ, dQ.swapaxes(0, 1) - dQ)

    return ap.memo(("forms", lam), build)


Factory = Callable[..., Berwald]


def _ap(s: Spray, p: EvalPoint, factory: Factory | None = None) -> Berwald:
    """The apparatus of ``s`` at ``p``; ``factory`` substitutes another implementation."""
    return apparatus(s, p) if factory is None else factory(s, p)


def _pair(s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None) -> tuple:
    """Base and changed apparatus on one shared basis."""
    base = _ap(s, p, factory)
    changed = (factory or Berwald)(apply_projective_change(s, lam), p, base.basis)
    return base, changed, factor_forms(base, lam)


def _residuals(pairs: dict) -> dict:
    return {name: relative_residual(np.asarray(a.value), np.asarray(b.value)) for name, (a, b) in pairs.items()}


def barthel_change_law(s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None) -> float:
    """Residual of ``N~^i_j = N^i_j + lambda delta^i_j + y^i alpha_j``."""
    base, changed, f = _pair(s, lam, p, factory)
    rhs = base.N + f.lam * np.eye(s.n) + contract("i,j->ij", base.y, f.alpha)
    return relative_residual(changed.N.value, rhs.value)


def berwald_change_law(s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None) -> float:
    """Residual of ``G~^i_jk = G^i_jk + alpha_j d^i_k + alpha_k d^i_j + y^i D2alpha_jk``."""
    base, changed, f = _pair(s, lam, p, factory)
    d = np.eye(s.n)
    rhs = (
        base.Gijk
        + contract("j,ik->ijk", f.alpha, d)
        + contract("k,ij->ijk", f.alpha, d)
        + contract("i,jk->ijk", base.y, f.D2alpha)
    )
    return relative_residual(changed.Gijk.value, rhs.value)


def curvature_change_laws(s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None) -> dict:
    """Residuals of the h-curvature and hv-curvature laws plus the torsion/deviation laws.

    Keys: ``h_curvature``, ``hv_curvature``, ``vh_torsion``, ``deviation``.
    """
    base, changed, f = _pair(s, lam, p, factory)
    d, y = np.eye(s.n), base.y
    Rc = (
        base.Rc
        + contract("km,ij->ijkm", f.dQ, d)
        - contract("jm,ik->ijkm", f.dQ, d)
        + contract("jk,im->ijkm", f.eps, d)
        + contract("i,jkm->ijkm", y, base.vgrad(f.eps))
    )
    D2, D3 = f.D2alpha, f.D2D2alpha
    P = (
        base.P
        + contract("jl,ik->ijkl", D2, d)
        + contract("kl,ij->ijkl", D2, d)
        + contract("jk,il->ijkl", D2, d)
        + contract("i,jkl->ijkl", y, D3)
    )
    Rhat = (
        base.Rhat
        + contract("k,ij->ijk", f.Q, d)
        - contract("j,ik->ijk", f.Q, d)
        + contract("i,jk->ijk", y, f.eps)
    )
    Qeta = contract("j,j->", f.Q, y)
    H = (
        base.H
        - Qeta * d
        + contract("i,k->ik", y, f.Q + contract("j,jk->k", y, f.eps))
    )
    return _residuals(
        {
            "h_curvature": (changed.Rc, Rc),
            "hv_curvature": (changed.P, P),
            "vh_torsion": (changed.Rhat, Rhat),
            "deviation": (changed.H, H),
        }
    )


def factor_identities(s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None) -> dict:
    """Self-consistency of the factor forms, and how they are read off the changed spray."""
    base, changed, f = _pair(s, lam, p, factory)
    n, y = s.n, base.y
    out = {
        "alpha_eta": relative_residual(contract("j,j->", f.alpha, y).value, f.lam.value),
        "D2alpha_symmetric": relative_residual(f.D2alpha.value, f.D2alpha.value.T),
        "D2alpha_eta": relative_residual(contract("j,jk->k", y, f.D2alpha).value, 0.0),
        "D2D2alpha_symmetric": max(
            relative_residual(f.D2D2alpha.value, f.D2D2alpha.value.transpose(perm))
            for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0))
        ),
        "D2D2alpha_eta": relative_residual(
            contract("jkl,l->jk", f.D2D2alpha, y).value, -f.D2alpha.value
        ),
        "eps_antisymmetric": relative_residual(f.eps.value, -f.eps.value.T),
        "eps_from_alpha": relative_residual(
            f.eps.value, (base.delta(f.alpha) - base.delta(f.alpha).swapaxes(0, 1)).value
        ),
        "eps_degree_0": base.euler_residual(f.eps, 0.0),
        "alpha_from_omega": relative_residual(
            ((changed.omega - base.omega) * (1.0 / (n + 1))).value, f.alpha.value
        ),
        "D2alpha_from_p": relative_residual(((changed.p - base.p) * (1.0 / (n + 1))).value, f.D2alpha.value),
        "D2D2alpha_from_dp": relative_residual(
            ((changed.vgrad(changed.p) - base.vgrad(base.p)) * (1.0 / (n + 1))).value, f.D2D2alpha.value
        ),
        "D2alpha_invariant": relative_residual(changed.vgrad(f.alpha).value, f.D2alpha.value),
    }
    if n > 2:
        out["Q_from_R1"] = relative_residual(((base.R1 - changed.R1) * (1.0 / (n + 1))).value, f.Q.value)
    return out


# Weyl tensors -----------------------------------------------------------------


def _weyl_W(ap: Berwald) -> Jet:
    def build():
        ap.require_n3()
        n, d = ap.n, np.eye(ap.n)
        dR1 = ap.vgrad(ap.R1)  # [b, a] = dR1_b / dy^a
        ddR1 = ap.vgrad(dR1)  # [b, a, c]
        T = (
            contract("km,ij->ijkm", dR1, d)
            + contract("kj,im->ijkm", dR1, d)
            + contract("i,kjm->ijkm", ap.y, ddR1)
        )
        return ap.Rc + (T - T.swapaxes(1, 2)) * (1.0 / (n + 1))

    return ap.memo("W", build)


def _weyl_W1(ap: Berwald) -> Jet:
    def build():
        ap.require_n3()
        n, d = ap.n, np.eye(ap.n)
        corr = (3.0 * ap.R1 - (n + 1) * ap.vgrad(ap.k)) * (1.0 / (n + 1))
        return ap.H - ap.k * d + contract("i,k->ik", ap.y, corr)

    return ap.memo("W1", build)


def _weyl_W2(ap: Berwald) -> Jet:
    def build():
        ap.require_n3()
        n, d = ap.n, np.eye(ap.n)
        U = contract("k,ij->ijk", ap.R1, d) + contract("i,kj->ijk", ap.y, ap.vgrad(ap.R1))
        return ap.Rhat + (U - U.swapaxes(1, 2)) * (1.0 / (n + 1))

    return ap.memo("W2", build)


def weyl_curvature(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "W", _weyl_W(ap), ("contra", "co", "co", "co"),
        "W[i, j, k, m] = W(X_j, Y_k) Z_m", (((1, 2), -1),),
    )


def weyl_deviation_and_torsion(s: Spray, p: EvalPoint) -> tuple:
    ap = apparatus(s, p)
    return (
        ap.tensor("W1", _weyl_W1(ap), ("contra", "co"), "W1[i, k] = W1(X_k)"),
        ap.tensor("W2", _weyl_W2(ap), ("contra", "co", "co"), "W2[i, j, k] = W2(X_j, Y_k)", (((1, 2), -1),)),
    )


def weyl_interrelations(s: Spray, p: EvalPoint, factory: Factory | None = None) -> dict:
    """``W2 = (dW1_k/dy^j - dW1_j/dy^k) / 3`` and ``W = dW2/dy^m``."""
    ap = _ap(s, p, factory)
    dW1 = ap.vgrad(_weyl_W1(ap))  # [i, k, j]
    W2_from_W1 = (dW1.swapaxes(1, 2) - dW1) * (1.0 / 3.0)
    return {
        "W2_from_W1": relative_residual(_weyl_W2(ap).value, W2_from_W1.value),
        "W_from_W2": relative_residual(_weyl_W(ap).value, ap.vgrad(_weyl_W2(ap)).value),
    }


# projective connection and Douglas tensor ---------------------------------------


def _pi(ap: Berwald) -> Jet:
    def build():
        n, d = ap.n, np.eye(ap.n)
        corr = (
            contract("k,ij->ijk", ap.omega, d)
            + contract("j,ik->ijk", ap.omega, d)
            + contract("i,jk->ijk", ap.y, ap.p)
        )
        return ap.Gijk - corr * (1.0 / (n + 1))

    return ap.memo("Pi", build)


def _douglas(ap: Berwald) -> Jet:
    def build():
        n, d = ap.n, np.eye(ap.n)
        p = ap.p
        dp = ap.vgrad(p)  # [j, l, k] = dp_jl / dy^k
        corr = (
            contract("jk,il->ijkl", p, d)
            + contract("kl,ij->ijkl", p, d)
            + contract("lj,ik->ijkl", p, d)
            + contract("i,jlk->ijkl", ap.y, dp)
        )
        return ap.P - corr * (1.0 / (n + 1))

    return ap.memo("Douglas", build)


def projective_connection(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "Pi", _pi(ap), ("contra", "co", "co"),
        "Pi[i, j, k] = Gijk - (omega_k d^i_j + omega_j d^i_k + p_jk y^i) / (n + 1)", (((1, 2), 1),),
    )


def douglas_tensor(s: Spray, p: EvalPoint) -> TensorValue:
    ap = apparatus(s, p)
    return ap.tensor(
        "Douglas", _douglas(ap), ("contra", "co", "co", "co"),
        "Douglas[i, j, k, l] = D(X_j, Y_k) Z_l", (((1, 2, 3), 1),),
    )


def _grad(ap: Berwald, t: Jet) -> Jet:
    return stack([t.diff(a) for a in range(2 * ap.n)], axis=-1)


def _covariant(ap: Berwald, gamma_h: Jet, V: Jet, Z: Jet) -> Jet:
    """``(D_V Z)^i = V^a d_a Z^i + gamma_h[i, j, k] Z^j V^k`` (vertical coefficients zero).

    ``V`` is a batch of vector fields on the tangent bundle, shape ``(A, 2n)``;
    ``Z`` a batch of sections, shape ``(..., n)``; result ``(A, ..., n)``.
    """
    n = ap.n
    deriv = contract("am,...im->a...i", V, _grad(ap, Z))
    C = contract("ijk,ak->aij", gamma_h, V[:, :n])
    return deriv + contract("aij,...j->a...i", C, Z)


def _connection_curvature(ap: Berwald, gamma_h: Jet, V: Jet, W: Jet, Z: Jet) -> Jet:
    """``K(V, W) Z = -D_V D_W Z + D_W D_V Z + D_[V, W] Z`` for batches ``V[a]``, ``W[b]``, ``Z[c]``."""
    A, B = V.shape[0], W.shape[0]
    first = _covariant(ap, gamma_h, V, _covariant(ap, gamma_h, W, Z))
    second = _covariant(ap, gamma_h, W, _covariant(ap, gamma_h, V, Z)).swapaxes(0, 1)
    bracket = contract("an,bmn->abm", V, _grad(ap, W)) - contract("bn,amn->abm", W, _grad(ap, V))
    third = _covariant(ap, gamma_h, bracket.reshape(A * B, 2 * ap.n), Z)
    return -first + second + third.reshape(A, B, *Z.shape)


def douglas_via_projective_connection(s: Spray, p: EvalPoint, factory: Factory | None = None) -> float:
    """Douglas tensor against the hv-curvature of the projective connection.

    The horizontal map of the projective connection is
    ``beta_bar(d_k) = d/dx^k + (-N^m_k + (omega(eta) d^m_k + omega_k y^m) / (n + 1)) d/dy^m``;
    its hv-curvature ``K(beta_bar X, gamma Y) Z`` is evaluated from the
    generic curvature formula, with no use of the closed-form tensor.
    """
    ap = _ap(s, p, factory)
    n, d, y = ap.n, np.eye(ap.n), ap.y
    A = -ap.N.swapaxes(0, 1) + (  # A[k, m]
        contract("j,j->", ap.omega, y) * d + contract("k,m->km", ap.omega, y)
    ) * (1.0 / (n + 1))
    V = _concat(Jet.constant(ap.basis, d), A)  # V[k] = beta_bar(d_k)
    W = Jet.constant(ap.basis, np.concatenate([np.zeros((n, n)), d], axis=1))
    Z = Jet.constant(ap.basis, d)
    K = _connection_curvature(ap, _pi(ap), V, W, Z)  # [j(X), k(Y), l(Z), i]
    return relative_residual(K.transpose(3, 0, 1, 2).value, _douglas(ap).value)


def _concat(a: Jet, b: Jet) -> Jet:
    """Concatenate two jets along their last batch axis."""
    return Jet(a.basis, np.concatenate([a.coef, b.coef], axis=-1), tuple(map(min, a.valid, b.valid)))


# invariance ------------------------------------------------------------------


INVARIANTS = {
    "W": _weyl_W,
    "W1": _weyl_W1,
    "W2": _weyl_W2,
    "Douglas": _douglas,
    "Pi": _pi,
}


def invariance_residuals(
    s: Spray, lam: ProjectiveFactor, p: EvalPoint, names=None, factory: Factory | None = None
) -> dict:
    """Relative residuals ``|T~ - T|`` of the projectively invariant tensors."""
    base, changed, _ = _pair(s, lam, p, factory)
    names = names or [k for k in INVARIANTS if s.n > 2 or k in ("Douglas", "Pi")]
    return {k: relative_residual(INVARIANTS[k](changed).value, INVARIANTS[k](base).value) for k in names}
