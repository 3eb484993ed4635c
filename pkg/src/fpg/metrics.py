"""Finsler metric families, sprays, and the metric-to-spray pipeline.

Chart convention for sprays: the spray vector field is
``y^i d/dx^i - 2 G^i d/dy^i``, so geodesics solve ``x'' + 2 G(x, x') = 0``
and a projective change reads ``G~^i = G^i + lambda y^i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import primitives as pm
from .derivatives import EvalPoint, euler_degree, taylor_coordinates
from .errors import DimensionError, DomainError, HomogeneityError, SingularMetric
from .jet import Basis, Jet, as_jet, contract, inv, stack
from .sampling import WorkingDomain, sample_points, sample_x
from .tensor import TensorValue

ScalarField = Callable[[Sequence, Sequence], object]

HOMOGENEITY_TOL = 1e-8
SPRAY_HOMOGENEITY_TOL = 1e-7
GATE_POINTS = 10
GATE_SEED = 20240611


@dataclass(frozen=True, eq=False)
class FinslerMetric:
    """A Finsler function ``L(x, y)`` together with its family tag."""

    n: int
    L: ScalarField
    family: str
    params: dict = field(default_factory=dict)
    energy_fn: ScalarField | None = None

    def energy(self, x, y):
        if self.energy_fn is not None:
            return self.energy_fn(x, y)
        L = self.L(x, y)
        return 0.5 * L * L


def energy(m: FinslerMetric, p: EvalPoint) -> float:
    """``E = L^2 / 2`` at ``p``."""
    _check_dim(m.n, p)
    return float(m.energy(p.x, p.y))


@dataclass(frozen=True)
class FundamentalTensor:
    g: TensorValue
    inverse: np.ndarray
    cond: float


def fundamental_tensor(m: FinslerMetric, p: EvalPoint) -> FundamentalTensor:
    """``g_ij = d^2 E / dy^i dy^j`` with its inverse and condition number."""
    _check_dim(m.n, p)
    n = m.n
    basis = Basis.taylor(n, 2, 0)
    xs, ys = taylor_coordinates(basis, p)
    E = as_jet(m.energy(xs, ys), basis)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            e = [0] * (2 * n)
            e[n + i] += 1
            e[n + j] += 1
            g[i, j] = E.partial(e)
    g = 0.5 * (g + g.T)
    _check_invertible(g, p)
    tv = TensorValue("g", g, ("co", "co"), "g[i, j] = d2E/dy^i dy^j", p, (((0, 1), 1),))
    return FundamentalTensor(tv, np.linalg.inv(g), float(np.linalg.cond(g)))


def _check_invertible(g: np.ndarray, p) -> None:
    n = g.shape[-1]
    scale = float(np.max(np.abs(g))) ** n if g.size else 0.0
    det = float(np.linalg.det(g))
    if not np.isfinite(det) or abs(det) < 1e-12 * max(scale, 1e-300):
        raise SingularMetric(f"fundamental tensor is singular at {p} (det={det:.3e})")


def _check_dim(n: int, p: EvalPoint) -> None:
    if p.n != n:
        raise DimensionError(f"object has dimension {n}, point has {p.n}")


# families --------------------------------------------------------------------


def euclidean(n: int) -> FinslerMetric:
    def L(x, y):
        return pm.sqrt(sum(v * v for v in y))

    def E(x, y):
        return 0.5 * sum(v * v for v in y)

    return FinslerMetric(n, L, "euclidean", {}, E)


def riemannian(n: int, g: Sequence[Sequence[ScalarField]], name: str = "riemannian") -> FinslerMetric:
    """``L = sqrt(g_ij(x) y^i y^j)``; entries of ``g`` are fields of ``x`` only."""
    if len(g) != n or any(len(row) != n for row in g):
        raise DimensionError(f"g must be {n}x{n}")

    def E(x, y):
        total = 0.0
        for i in range(n):
            for j in range(n):
                gij = g[i][j](x, y)
                if isinstance(gij, Jet) or gij != 0.0:
                    total = total + gij * y[i] * y[j]
        return 0.5 * total

    def L(x, y):
        return pm.sqrt(2.0 * E(x, y))

    return FinslerMetric(n, L, "riemannian", {"name": name, "g": g}, E)


def randers(
    n: int,
    a: Sequence[Sequence[ScalarField]],
    b: Sequence[ScalarField],
    domain: WorkingDomain | None = None,
    name: str = "randers",
) -> FinslerMetric:
    """``L = sqrt(a_ij(x) y^i y^j) + b_i(x) y^i``.

    Registration requires ``|b|_a < 1`` at sampled base points of ``domain``.
    """
    if len(a) != n or len(b) != n:
        raise DimensionError("Randers data has the wrong dimension")
    domain = domain or WorkingDomain.cube(n)
    for x in sample_x(domain, 4 * GATE_POINTS, GATE_SEED):
        xa = tuple(x)
        A = np.array([[float(a[i][j](xa, (1.0,) * n)) for j in range(n)] for i in range(n)])
        bv = np.array([float(b[i](xa, (1.0,) * n)) for i in range(n)])
        if np.linalg.eigvalsh(0.5 * (A + A.T)).min() <= 0:
            raise DomainError(f"Randers a is not positive definite at x={xa}")
        if float(bv @ np.linalg.solve(A, bv)) >= 1.0:
            raise DomainError(f"Randers strong convexity fails (|b|_a >= 1) at x={xa}")

    def L(x, y):
        quad = 0.0
        for i in range(n):
            for j in range(n):
                aij = a[i][j](x, y)
                if isinstance(aij, Jet) or aij != 0.0:
                    quad = quad + aij * y[i] * y[j]
        return pm.sqrt(quad) + sum(b[i](x, y) * y[i] for i in range(n))

    return FinslerMetric(n, L, "randers", {"name": name, "a": a, "b": b})


def minkowski(n: int, L: ScalarField, name: str = "minkowski") -> FinslerMetric:
    """A norm of ``y`` alone (no base-point dependence)."""

    def L_y(x, y):
        return L(x, y)

    return FinslerMetric(n, L_y, "minkowski", {"name": name})


def custom(n: int, L: ScalarField, name: str = "custom") -> FinslerMetric:
    return FinslerMetric(n, L, "custom", {"name": name})


def register_metric(m: FinslerMetric, domain: WorkingDomain | None = None) -> FinslerMetric:
    """Sampled gate: ``L > 0``, ``L`` positively homogeneous of degree 1, ``g`` invertible."""
    domain = domain or WorkingDomain.cube(m.n)
    for p in sample_points(domain, GATE_POINTS, GATE_SEED):
        value = float(m.L(p.x, p.y))
        if not value > 0:
            raise DomainError(f"metric is not positive at {p}")
        deg = euler_degree(m.L, p)
        if abs(deg - 1.0) > HOMOGENEITY_TOL:
            raise HomogeneityError(f"metric has Euler degree {deg:.10g} != 1 at {p}")
        fundamental_tensor(m, p)
    return m


# sprays ----------------------------------------------------------------------


class Spray:
    """Spray coefficients ``G^i(x, y)``.

    ``overhead`` is the number of extra (total, x) derivative orders the
    spray consumes from the basis it is evaluated on.
    """

    overhead = (0, 0)
    provenance = "explicit"

    def __init__(self, n: int):
        self.n = n

    def jet(self, basis: Basis, p: EvalPoint) -> Jet:
        """Taylor jet of the vector ``G`` around ``p`` on ``basis``."""
        raise NotImplementedError

    def value(self, p: EvalPoint) -> np.ndarray:
        _check_dim(self.n, p)
        basis = Basis.taylor(self.n, self.overhead[0], self.overhead[1])
        return np.asarray(self.jet(basis, p).value, dtype=float)

    def basis_for(self, order: int, x_order: int) -> Basis:
        """Basis on which ``jet`` is exact to y-order ``order`` and x-order ``x_order``."""
        return Basis.taylor(self.n, order + self.overhead[0], x_order + self.overhead[1])


class MetricSpray(Spray):
    """Canonical spray of a Finsler metric: ``2G^i = g^ij (y^k E_{y^j x^k} - E_{x^j})``."""

    overhead = (2, 1)
    provenance = "metric-derived"

    def __init__(self, metric: FinslerMetric):
        super().__init__(metric.n)
        self.metric = metric

    def __repr__(self) -> str:
        return f"MetricSpray({self.metric.family}:{self.metric.params.get('name', '')})"

    def jet(self, basis: Basis, p: EvalPoint) -> Jet:
        n = self.n
        xs, ys = taylor_coordinates(basis, p)
        E = as_jet(self.metric.energy(xs, ys), basis)
        Ey = [E.diff(n + j) for j in range(n)]
        g = stack([stack([Ey[j].diff(n + k) for k in range(n)]) for j in range(n)])
        _check_invertible(g.value, p)
        Ex = stack([E.diff(j) for j in range(n)])
        Eyx = stack([stack([Ey[j].diff(k) for k in range(n)]) for j in range(n)])
        rhs = contract("jk,k->j", Eyx, stack(ys)) - Ex
        return 0.5 * contract("ij,j->i", inv(g), rhs)


class ExplicitSpray(Spray):
    """User-supplied spray components, each a scalar field."""

    def __init__(self, n: int, components: Sequence[ScalarField], name: str = "explicit"):
        if len(components) != n:
            raise DimensionError(f"need {n} spray components, got {len(components)}")
        super().__init__(n)
        self.components = tuple(components)
        self.name = name

    def __repr__(self) -> str:
        return f"ExplicitSpray({self.name})"

    def jet(self, basis: Basis, p: EvalPoint) -> Jet:
        xs, ys = taylor_coordinates(basis, p)
        return stack([as_jet(c(xs, ys), basis) for c in self.components])


def register_spray(s: Spray, domain: WorkingDomain | None = None) -> Spray:
    """Sampled gate: every nonzero ``G^i`` has Euler degree 2."""
    domain = domain or WorkingDomain.cube(s.n)
    for p in sample_points(domain, GATE_POINTS, GATE_SEED):
        deg = spray_euler_degrees(s, p)
        bad = [d for d in deg if d is not None and abs(d - 2.0) > SPRAY_HOMOGENEITY_TOL]
        if bad:
            raise HomogeneityError(f"spray component has Euler degree {bad[0]:.10g} != 2 at {p}")
    return s


def spray_euler_degrees(s: Spray, p: EvalPoint) -> list:
    """Euler degree of each component (``None`` where the component vanishes)."""
    basis = s.basis_for(1, 0)
    G = s.jet(basis, p)
    value = G.value
    slope = sum(p.y[m] * G.diff(s.n + m).value for m in range(s.n))
    scale = max(1.0, float(np.max(np.abs(value))))
    return [None if abs(v) <= 1e-14 * scale else float(d / v) for v, d in zip(value, slope)]


def canonical_spray(m: FinslerMetric) -> MetricSpray:
    return MetricSpray(m)


# projective factors and changed sprays ----------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectiveFactor:
    """A factor ``lambda(x, y)``, positively homogeneous of degree 1 in ``y``."""

    n: int
    fn: ScalarField
    name: str = "lambda"
    is_zero: bool = False

    def __call__(self, x, y):
        return self.fn(x, y)


def zero_factor(n: int) -> ProjectiveFactor:
    return ProjectiveFactor(n, lambda x, y: 0.0, "zero", True)


def projective_factor(
    n: int, fn: ScalarField, name: str = "lambda", domain: WorkingDomain | None = None
) -> ProjectiveFactor:
    lam = ProjectiveFactor(n, fn, name)
    check_factor(lam, domain)
    return lam


def check_factor(lam: ProjectiveFactor, domain: WorkingDomain | None = None) -> None:
    if lam.is_zero:
        return
    domain = domain or WorkingDomain.cube(lam.n)
    for p in sample_points(domain, GATE_POINTS, GATE_SEED):
        if float(lam(p.x, p.y)) == 0.0:
            continue
        deg = euler_degree(lam.fn, p)
        if abs(deg - 1.0) > HOMOGENEITY_TOL:
            raise HomogeneityError(
                f"projective factor {lam.name!r} has Euler degree {deg:.10g} != 1 at {p}"
            )


class ProjectiveSpray(Spray):
    """``G~^i = G^i + lambda y^i``."""

    provenance = "projectively-changed"

    def __init__(self, parent: Spray, factor: ProjectiveFactor):
        if factor.n != parent.n:
            raise DimensionError("factor and spray dimensions differ")
        super().__init__(parent.n)
        self.parent = parent
        self.factor = factor
        self.overhead = parent.overhead

    def __repr__(self) -> str:
        return f"ProjectiveSpray({self.parent!r}, {self.factor.name})"

    def jet(self, basis: Basis, p: EvalPoint) -> Jet:
        G = self.parent.jet(basis, p)
        if self.factor.is_zero:
            return G
        xs, ys = taylor_coordinates(basis, p)
        lam = as_jet(self.factor(xs, ys), basis)
        return G + lam * stack(ys)
