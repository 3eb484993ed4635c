"""Built-in metric and projective-factor fixtures in dimension 3."""

from __future__ import annotations

from . import primitives as pm
from .derivatives import EvalPoint
from .metrics import (
    FinslerMetric,
    ProjectiveFactor,
    custom,
    euclidean,
    minkowski,
    randers,
    riemannian,
    zero_factor,
)

N = 3

#: Reference point used throughout the examples.
P0 = EvalPoint((0.1, 0.2, 0.3), (1.0, 0.5, -0.25))


def _const(c: float):
    return lambda x, y: c


def _sphere_conformal(x, y):
    r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    return pm.div(4.0, pm.ipow(1.0 + r2, 2))


def sphere_metric() -> FinslerMetric:
    """Stereographic chart of the unit round 3-sphere, ``g = 4 delta / (1 + |x|^2)^2``."""
    zero = _const(0.0)
    g = [[_sphere_conformal if i == j else zero for j in range(N)] for i in range(N)]
    return riemannian(N, g, name="sphere")


def sphere_christoffel(x) -> "list":
    """Christoffel symbols of the sphere chart, coded directly from ``g = e^{2u} delta``.

    With ``u = log 2 - log(1 + |x|^2)`` one has
    ``Gamma^i_jk = delta_ij u_k + delta_ik u_j - delta_jk u_i``.
    """
    r2 = sum(v * v for v in x)
    du = [-2.0 * v / (1.0 + r2) for v in x]
    out = [[[0.0] * N for _ in range(N)] for _ in range(N)]
    for i in range(N):
        for j in range(N):
            for k in range(N):
                out[i][j][k] = (
                    (du[k] if i == j else 0.0) + (du[j] if i == k else 0.0) - (du[i] if j == k else 0.0)
                )
    return out


def randers_metric() -> FinslerMetric:
    """Euclidean ``a`` with ``b = 0.1 x^2 dx^1`` (``db != 0``, so not Berwald and not Douglas)."""
    one, zero = _const(1.0), _const(0.0)
    a = [[one if i == j else zero for j in range(N)] for i in range(N)]
    b = [lambda x, y: 0.1 * x[1], zero, zero]
    return randers(N, a, b, name="randers-nonclosed")


def minkowski_metric() -> FinslerMetric:
    """The quartic Minkowski norm ``(sum (y^i)^4)^(1/4)``."""

    def L(x, y):
        return pm.sqrt(pm.sqrt(sum(pm.ipow(v, 4) for v in y)))

    return minkowski(N, L, name="quartic")


def lambda_lin() -> ProjectiveFactor:
    return ProjectiveFactor(N, lambda x, y: 0.05 * (y[0] + x[0] * y[1]), "lambda_lin")


def lambda_norm(metric: FinslerMetric) -> ProjectiveFactor:
    return ProjectiveFactor(metric.n, lambda x, y: 0.2 * metric.L(x, y), "lambda_norm")


def lambda_zero() -> ProjectiveFactor:
    return zero_factor(N)


M_EUC = euclidean(N)
M_SPH = sphere_metric()
M_RAND = randers_metric()
M_MINK = minkowski_metric()

METRICS = {"euclidean": M_EUC, "sphere": M_SPH, "randers": M_RAND, "minkowski": M_MINK}


def factors_for(metric: FinslerMetric) -> dict:
    return {"zero": lambda_zero(), "lin": lambda_lin(), "norm": lambda_norm(metric)}


__all__ = [
    "N", "P0", "M_EUC", "M_SPH", "M_RAND", "M_MINK", "METRICS", "custom",
    "sphere_christoffel", "lambda_lin", "lambda_norm", "lambda_zero", "factors_for",
]
