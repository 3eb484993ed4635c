"""Identity suites: run numerical identities over seeded samples and fold them into reports."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .berwald import Berwald, apparatus
from .derivatives import EvalPoint, directional_derivative
from .errors import FPGError
from .metrics import ProjectiveFactor, Spray
from .oracle import FDScheme, classical_douglas, fd_derivative
from .projective import (
    Factory,
    _douglas,
    _pi,
    _weyl_W,
    _weyl_W1,
    _weyl_W2,
    apply_projective_change,
    barthel_change_law,
    berwald_change_law,
    curvature_change_laws,
    douglas_via_projective_connection,
    factor_identities,
    invariance_residuals,
    weyl_interrelations,
)
from .tensor import relative_residual

ONE_TOWER = 1e-8
TWO_TOWER = 1e-7

# id -> (anchor, default threshold)
IDENTITIES = {
    # transformation laws
    "barthel_change_law": ("Barthel connection under a projective change", TWO_TOWER),
    "berwald_change_law": ("Berwald coefficients under a projective change", TWO_TOWER),
    "h_curvature_change_law": ("h-curvature under a projective change", TWO_TOWER),
    "hv_curvature_change_law": ("hv-curvature under a projective change", TWO_TOWER),
    "vh_torsion_change_law": ("(v)h-torsion under a projective change", TWO_TOWER),
    "deviation_change_law": ("deviation tensor under a projective change", TWO_TOWER),
    # invariance
    "weyl_curvature_invariant": ("Weyl curvature is projectively invariant", TWO_TOWER),
    "weyl_deviation_invariant": ("projective deviation tensor is projectively invariant", TWO_TOWER),
    "weyl_torsion_invariant": ("Weyl torsion is projectively invariant", TWO_TOWER),
    "douglas_invariant": ("Douglas tensor is projectively invariant", TWO_TOWER),
    "projective_connection_invariant": ("projective connection is projectively invariant", TWO_TOWER),
    # factor forms
    "alpha_eta": ("alpha(eta) = lambda", ONE_TOWER),
    "D2alpha_symmetric": ("D2 alpha is symmetric", ONE_TOWER),
    "D2alpha_eta": ("D2 alpha(eta, .) = 0", ONE_TOWER),
    "D2D2alpha_symmetric": ("D2 D2 alpha is totally symmetric", ONE_TOWER),
    "D2D2alpha_eta": ("D2 D2 alpha(., ., eta) = -D2 alpha", ONE_TOWER),
    "eps_antisymmetric": ("epsilon is antisymmetric", ONE_TOWER),
    "eps_from_alpha": ("epsilon equals the horizontal curl of alpha", ONE_TOWER),
    "eps_degree_0": ("epsilon is homogeneous of degree 0", ONE_TOWER),
    "alpha_from_omega": ("alpha = (omega~ - omega) / (n + 1)", TWO_TOWER),
    "D2alpha_from_p": ("D2 alpha = (p~ - p) / (n + 1)", TWO_TOWER),
    "D2D2alpha_from_dp": ("D2 D2 alpha = (D2 p~ - D2 p) / (n + 1)", TWO_TOWER),
    "D2alpha_invariant": ("vertical derivative is unchanged by a projective change", ONE_TOWER),
    "Q_from_R1": ("Q = (R1 - R1~) / (n + 1)", TWO_TOWER),
    # cross-derivations
    "W2_from_W1": ("Weyl torsion from the projective deviation tensor", ONE_TOWER),
    "W_from_W2": ("Weyl curvature from the Weyl torsion", ONE_TOWER),
    "douglas_is_hv_curvature_of_projective_connection": (
        "Douglas tensor is the hv-curvature of the projective connection", TWO_TOWER,
    ),
    "douglas_is_hv_curvature_of_projective_connection_changed": (
        "same, for the projectively changed spray", TWO_TOWER,
    ),
    "weyl_vanishing_equivalence": ("W2 = 0 iff W = 0 iff W1 = 0 on the sample set", ONE_TOWER),
    # structural
    "P_totally_symmetric": ("hv-curvature is totally symmetric", ONE_TOWER),
    "P_eta": ("hv-curvature vanishes on eta", ONE_TOWER),
    "N_euler": ("N(eta) = 2 G", ONE_TOWER),
    "Gijk_symmetric": ("Berwald coefficients are symmetric", ONE_TOWER),
    "Rhat_antisymmetric": ("(v)h-torsion is antisymmetric", ONE_TOWER),
    "Rhat_from_H": ("(v)h-torsion is one third of the curl of H", ONE_TOWER),
    "H_eta": ("H(eta) = 0", ONE_TOWER),
    "Rc_eta": ("R°(X, Y) eta = Rhat(X, Y)", ONE_TOWER),
    "Rc_cyclic": ("cyclic sum of the h-curvature vanishes", ONE_TOWER),
    "theta_from_R2": ("theta is the antisymmetrization of R2", ONE_TOWER),
    "R1_eta": ("R1(eta) = (n + 1) k", ONE_TOWER),
    "W1_eta": ("W1(eta) = 0", ONE_TOWER),
    "W2_eta": ("W2(eta, .) = W1", ONE_TOWER),
    "W_eta": ("W(., .) eta = W2", ONE_TOWER),
    "douglas_totally_symmetric": ("Douglas tensor is totally symmetric", ONE_TOWER),
    "douglas_eta": ("Douglas tensor vanishes on eta", ONE_TOWER),
    "p_eta": ("p(., eta) = 0", ONE_TOWER),
    "p_from_omega": ("p = D2 omega", ONE_TOWER),
    "projective_connection_symmetric": ("projective connection is torsion free", ONE_TOWER),
    # homogeneity
    "degree_P": ("hv-curvature is h(-1)", TWO_TOWER),
    "degree_Rc": ("h-curvature is h(0)", TWO_TOWER),
    "degree_Rhat": ("(v)h-torsion is h(1)", TWO_TOWER),
    "degree_H": ("deviation tensor is h(2)", TWO_TOWER),
    "degree_theta": ("theta is h(0)", TWO_TOWER),
    "degree_R2": ("R2 is h(0)", TWO_TOWER),
    "degree_R1": ("R1 is h(1)", TWO_TOWER),
    "degree_k": ("k is h(2)", TWO_TOWER),
    "degree_douglas": ("Douglas tensor is h(-1)", TWO_TOWER),
    # oracle
    "jet_vs_fd": ("jet derivatives agree with finite differences", 1e-5),
    "douglas_vs_classical": ("Douglas tensor agrees with the classical chart formula", 1e-5),
}


@dataclass
class IdentityRecord:
    id: str
    anchor: str
    points: int
    max_residual: float
    threshold: float
    verdict: str
    worst_case: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "points": self.points,
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "worst_case": self.worst_case,
        }


@dataclass
class SuiteReport:
    suite: str
    records: list = field(default_factory=list)
    seed: int | None = None
    cases: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    elapsed: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return not self.errors and all(r.verdict == "holds" for r in self.records)

    @property
    def failures(self) -> list:
        return [r for r in self.records if r.verdict != "holds"]

    def record(self, ident: str) -> IdentityRecord:
        return next(r for r in self.records if r.id == ident)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "cases": list(self.cases),
            "records": [r.to_dict() for r in self.records],
            "summary": {
                "identities": len(self.records),
                "failed": [r.id for r in self.failures],
                "errors": list(self.errors),
                "all_hold": self.all_hold,
            },
            **self.extra,
            "environment": {"version": __version__, "seed": self.seed, "timing_s": round(self.elapsed, 3)},
        }


class _Fold:
    """Running max of residuals per identity, in first-seen order."""

    def __init__(self, thresholds: dict | None = None):
        self.data: dict = {}
        self.thresholds = thresholds or {}

    def add(self, ident: str, value: float, case: str) -> None:
        value = float(value)
        if not np.isfinite(value):
            value = float("inf")
        cur = self.data.get(ident)
        if cur is None:
            self.data[ident] = [value, 1, case]
        else:
            cur[1] += 1
            if value > cur[0]:
                cur[0], cur[2] = value, case

    def records(self, tol_override: float | None = None) -> list:
        out = []
        for ident, (worst, count, case) in self.data.items():
            anchor, thr = IDENTITIES[ident]
            thr = self.thresholds.get(ident, thr if tol_override is None else tol_override)
            out.append(IdentityRecord(ident, anchor, count, worst, thr, "holds" if worst <= thr else "fails", case))
        return out


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FPG_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Sequence) -> list:
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _safe(fn: Callable, *args):
    try:
        return fn(*args), None
    except FPGError as exc:
        return None, f"{type(exc).__name__}: {exc}"


# per-point residual sets --------------------------------------------------------


def invariance_point(
    s: Spray, lam: ProjectiveFactor, p: EvalPoint, factory: Factory | None = None
) -> dict:
    out = {}
    out["barthel_change_law"] = barthel_change_law(s, lam, p, factory)
    out["berwald_change_law"] = berwald_change_law(s, lam, p, factory)
    laws = curvature_change_laws(s, lam, p, factory)
    for key in ("h_curvature", "hv_curvature", "vh_torsion", "deviation"):
        out[f"{key}_change_law"] = laws[key]
    names = {"W": "weyl_curvature", "W1": "weyl_deviation", "W2": "weyl_torsion",
             "Douglas": "douglas", "Pi": "projective_connection"}
    for k, v in invariance_residuals(s, lam, p, factory=factory).items():
        out[f"{names[k]}_invariant"] = v
    out.update(factor_identities(s, lam, p, factory))
    if s.n > 2:
        out.update(weyl_interrelations(s, p, factory))
    out["douglas_is_hv_curvature_of_projective_connection"] = douglas_via_projective_connection(s, p, factory)
    out["douglas_is_hv_curvature_of_projective_connection_changed"] = douglas_via_projective_connection(
        apply_projective_change(s, lam), p, factory
    )
    return out


def structural_point(s: Spray, p: EvalPoint, factory: Factory | None = None) -> dict:
    ap = apparatus(s, p) if factory is None else factory(s, p)
    n = ap.n
    y = p.ya
    G, N, Gijk, P = ap.G.value, ap.N.value, ap.Gijk.value, ap.P.value
    Rhat, H, Rc = ap.Rhat.value, ap.H.value, ap.Rc.value
    rr = relative_residual
    out = {
        "N_euler": rr(N @ y, 2 * G),
        "Gijk_symmetric": rr(Gijk, Gijk.transpose(0, 2, 1)),
        "P_totally_symmetric": max(rr(P, P.transpose(0, *perm)) for perm in ((2, 1, 3), (1, 3, 2), (3, 2, 1))),
        "P_eta": rr(P @ y, 0.0),
        "Rhat_antisymmetric": rr(Rhat, -Rhat.transpose(0, 2, 1)),
        "H_eta": rr(H @ y, 0.0),
        "Rc_eta": rr(Rc @ y, Rhat),
        "Rc_cyclic": rr(Rc + Rc.transpose(0, 2, 3, 1) + Rc.transpose(0, 3, 1, 2), 0.0),
    }
    dH = ap.vgrad(ap.H).value  # [i, k, j] = dH^i_k / dy^j
    out["Rhat_from_H"] = rr(Rhat, (dH.transpose(0, 2, 1) - dH) / 3.0)
    omega, pp = ap.omega, ap.p.value
    out["p_eta"] = rr(pp @ y, 0.0)
    out["p_from_omega"] = rr(pp, ap.vgrad(omega).value)
    D = _douglas(ap).value
    out["douglas_totally_symmetric"] = max(
        rr(D, D.transpose(0, *perm)) for perm in ((2, 1, 3), (1, 3, 2), (3, 2, 1))
    )
    out["douglas_eta"] = rr(D @ y, 0.0)
    Pi = _pi(ap).value
    out["projective_connection_symmetric"] = rr(Pi, Pi.transpose(0, 2, 1))
    if n > 2:
        theta, R2, R1, k = ap.theta.value, ap.R2.value, ap.R1.value, ap.k.value
        W, W1, W2 = _weyl_W(ap).value, _weyl_W1(ap).value, _weyl_W2(ap).value
        out["theta_from_R2"] = rr(theta, R2 - R2.T)
        out["R1_eta"] = rr(R1 @ y, (n + 1) * k)
        out["W1_eta"] = rr(W1 @ y, 0.0)
        out["W2_eta"] = rr(np.einsum("j,ijk->ik", y, W2), W1)
        out["W_eta"] = rr(W @ y, W2)
    return out


def homogeneity_point(s: Spray, p: EvalPoint, factory: Factory | None = None) -> dict:
    ap = apparatus(s, p) if factory is None else factory(s, p)
    out = {
        "degree_P": ap.euler_residual(ap.P, -1),
        "degree_Rc": ap.euler_residual(ap.Rc, 0),
        "degree_Rhat": ap.euler_residual(ap.Rhat, 1),
        "degree_H": ap.euler_residual(ap.H, 2),
        "degree_douglas": ap.euler_residual(_douglas(ap), -1),
    }
    if ap.n > 2:
        out.update(
            degree_theta=ap.euler_residual(ap.theta, 0),
            degree_R2=ap.euler_residual(ap.R2, 0),
            degree_R1=ap.euler_residual(ap.R1, 1),
            degree_k=ap.euler_residual(ap.k, 2),
        )
    return out


def weyl_norms(s: Spray, p: EvalPoint, factory: Factory | None = None) -> tuple:
    """``(|W|, |W1|, |W2|)`` each relative to ``1 + |R°|`` style scales."""
    ap = apparatus(s, p) if factory is None else factory(s, p)
    scale = 1.0 + float(np.max(np.abs(ap.Rc.value)))
    hs = 1.0 + float(np.max(np.abs(ap.H.value)))
    ts = 1.0 + float(np.max(np.abs(ap.Rhat.value)))
    return (
        float(np.max(np.abs(_weyl_W(ap).value))) / scale,
        float(np.max(np.abs(_weyl_W1(ap).value))) / hs,
        float(np.max(np.abs(_weyl_W2(ap).value))) / ts,
    )


def weyl_vanishing_equivalence(norms: Sequence[tuple], tau: float = ONE_TOWER) -> float:
    """0 when the three-way vanishing equivalence is consistent on the sample set, else the offending norm.

    Whenever one of ``max|W|``, ``max|W1|``, ``max|W2|`` is at most ``tau``,
    the others must be at most ``10 tau``.
    """
    if not norms:
        return 0.0
    maxima = np.max(np.asarray(norms), axis=0)
    if np.any(maxima <= tau) and np.any(maxima > 10 * tau):
        return float(np.max(maxima))
    return 0.0


# suites ----------------------------------------------------------------------------


@dataclass
class Case:
    label: str
    spray: Spray
    factor: ProjectiveFactor | None = None


def _run(name: str, cases, points, per_point, seed, tol=None, thresholds=None) -> SuiteReport:
    t0 = time.perf_counter()
    fold = _Fold(thresholds)
    report = SuiteReport(name, seed=seed, cases=[c.label for c in cases])
    jobs = [(c, i, p) for c in cases for i, p in enumerate(points)]
    results = _map(lambda job: _safe(per_point, job[0], job[2]), jobs)
    for (c, i, _), (res, err) in zip(jobs, results):
        if err is not None:
            report.errors.append(f"{c.label} point {i}: {err}")
            continue
        for ident, value in res.items():
            fold.add(ident, value, f"{c.label} point {i}")
    report.records = fold.records(tol)
    report.elapsed = time.perf_counter() - t0
    return report


def invariance_suite(
    cases: Sequence[Case], points: Sequence[EvalPoint], seed=None, tol=None, factory: Factory | None = None
) -> SuiteReport:
    """Transformation laws, invariance, factor identities and cross-derivations."""

    def per_point(case, p):
        return invariance_point(case.spray, case.factor, p, factory)

    report = _run("invariance", cases, points, per_point, seed, tol)
    fold = _Fold()
    for c in cases:
        if c.spray.n > 2:
            norms = _map(lambda p: weyl_norms(c.spray, p, factory), list(points))
            fold.add("weyl_vanishing_equivalence", weyl_vanishing_equivalence(norms), c.label)
    report.records.extend(fold.records(tol))
    return report


def structural_suite(cases, points, seed=None, tol=None, factory: Factory | None = None) -> SuiteReport:
    return _run("structural", cases, points, lambda c, p: structural_point(c.spray, p, factory), seed, tol)


def homogeneity_suite(cases, points, seed=None, tol=None, factory: Factory | None = None) -> SuiteReport:
    return _run("homogeneity", cases, points, lambda c, p: homogeneity_point(c.spray, p, factory), seed, tol)


# oracle cross-check ------------------------------------------------------------------


def oracle_suite(
    fields: Sequence[tuple], n: int, points: Sequence[EvalPoint], samples: int, seed: int,
    douglas_cases: Sequence[Case] = (), tol=None,
) -> SuiteReport:
    """Jet vs finite differences on random (field, point, directions) draws.

    ``fields`` is a list of ``(label, f)`` scalar fields.  Directions are
    random unit 2n-vectors, 1 to 3 of them per draw.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    fold = _Fold()
    report = SuiteReport("oracle-check", seed=seed, cases=[lbl for lbl, _ in fields])
    draws = []
    for _ in range(samples):
        label, f = fields[int(rng.integers(len(fields)))]
        p = points[int(rng.integers(len(points)))]
        k = int(rng.integers(1, 4))
        dirs = rng.normal(size=(k, 2 * n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        draws.append((label, f, p, dirs))

    def one(draw):
        label, f, p, dirs = draw
        return relative_residual(directional_derivative(f, p, list(dirs)), fd_derivative(f, p, list(dirs)))

    for (label, *_), (res, err) in zip(draws, _map(lambda d: _safe(one, d), draws)):
        if err is not None:
            report.errors.append(f"{label}: {err}")
        else:
            fold.add("jet_vs_fd", res, label)
    for c in douglas_cases:
        p = points[0]
        res, err = _safe(lambda: relative_residual(
            classical_douglas(c.spray, p).components, _douglas(apparatus(c.spray, p)).value))
        if err is not None:
            report.errors.append(f"{c.label}: {err}")
        else:
            fold.add("douglas_vs_classical", res, c.label)
    report.records = fold.records(tol)
    report.elapsed = time.perf_counter() - t0
    return report


class FlippedTorsion(Berwald):
    """Test double whose (v)h-torsion carries the wrong sign."""

    def _rhat(self):
        return -super()._rhat()
