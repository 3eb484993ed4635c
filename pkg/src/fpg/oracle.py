"""Finite-difference oracle, independent of the jet pipeline.

``fd_derivative`` uses nested central differences along the requested
directions and Richardson extrapolation over halved steps.  The classical
Douglas tensor is computed from the spray by a separate route: spray values
from hyper-dual derivatives of the energy (with a dual-number linear solve),
then third fiber derivatives by finite differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .derivatives import EvalPoint
from .errors import ArityError, DimensionError, DomainError, StepUnderflow
from .jet import Basis, Jet
from .metrics import ExplicitSpray, MetricSpray, ProjectiveSpray, Spray
from .tensor import TensorValue

MAX_FD_ORDER = 4


@dataclass(frozen=True)
class FDScheme:
    h0: float = 1e-3
    levels: int = 3
    min_step: float = 1e-10

    def __post_init__(self):
        if self.h0 <= 0 or self.levels < 1:
            raise ValueError("need h0 > 0 and at least one Richardson level")


@dataclass(frozen=True)
class FDResult:
    value: np.ndarray | float
    error: float
    step: float
    table: tuple  # last row of the Richardson tableau, coarse to fine


def _central(f, base: np.ndarray, dirs: list, h: float):
    k = len(dirs)
    total = 0.0
    for signs in itertools.product((1.0, -1.0), repeat=k):
        shift = sum(s * d for s, d in zip(signs, dirs))
        total = total + np.prod(signs) * np.asarray(f(base + h * shift), dtype=float)
    return total / (2.0 * h) ** k


def fd_derivative(
    f: Callable,
    p: EvalPoint,
    dirs: Sequence,
    scheme: FDScheme = FDScheme(),
    full: bool = False,
):
    """Mixed derivative of ``f(x, y)`` along 2n-vectors ``dirs`` (x components first).

    ``f`` may be scalar or array valued.  Returns the extrapolated value, or
    an :class:`FDResult` with an error estimate when ``full`` is set.
    """
    dirs = [np.asarray(d, dtype=float) for d in dirs]
    k = len(dirs)
    if not 1 <= k <= MAX_FD_ORDER:
        raise ArityError(f"finite differences support 1..{MAX_FD_ORDER} directions, got {k}")
    n = p.n
    for d in dirs:
        if d.shape != (2 * n,):
            raise DimensionError(f"direction must have {2 * n} components, got {d.shape}")
    base = np.concatenate([p.xa, p.ya])
    scale = 1.0 + float(np.linalg.norm(base))

    def g(z):
        return f(tuple(z[:n]), tuple(z[n:]))

    h = scheme.h0 * k * scale
    while True:
        try:
            rows = [_central(g, base, dirs, h / 2**lvl) for lvl in range(scheme.levels)]
            break
        except (DomainError, ZeroDivisionError, ValueError):
            h /= 4.0
            if h < scheme.min_step * scale:
                raise StepUnderflow(f"no admissible finite-difference step at {p}") from None
    if h < scheme.min_step * scale:
        raise StepUnderflow(f"finite-difference step {h:.2e} below {scheme.min_step:.0e} * scale")
    # Richardson tableau for an O(h^2) central scheme
    table = [rows]
    for j in range(1, scheme.levels):
        prev = table[-1]
        fac = 4.0**j
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0) for i in range(len(prev) - 1)])
    value = table[-1][-1]
    if scheme.levels > 1:
        err = float(np.max(np.abs(value - table[-2][-1])))
    else:
        err = float("nan")
    if full:
        return FDResult(value, err, h, tuple(t[-1] for t in table))
    return value


# classical Douglas oracle -------------------------------------------------------


def _hyperdual(x, y, tags: list) -> tuple:
    """Coordinates carrying one first-order dual tag per entry of ``tags`` (2n-vectors)."""
    basis = Basis.hyperdual(len(tags))
    base = tuple(x) + tuple(y)
    coords = [Jet.variable(basis, base[a], [t[a] for t in tags]) for a in range(len(base))]
    n = len(x)
    return coords[:n], coords[n:]


def _unit(m: int, i: int) -> np.ndarray:
    e = np.zeros(m)
    e[i] = 1.0
    return e


def _coef(v, e) -> float:
    return v.coefficient(e) if isinstance(v, Jet) else (float(v) if not any(e) else 0.0)


def _metric_spray_dual(energy, x, y, w: np.ndarray) -> tuple:
    """``G`` and its derivative along fiber direction ``w``, as (value, slope) arrays.

    Second derivatives of the energy come from two dual tags; the third tag
    carries the perturbation ``y + t w``.  The spray solves
    ``g G = (Eyx y - Ex) / 2``, differentiated once by the product rule.
    """
    n = len(x)
    W = np.concatenate([np.zeros(n), w])
    g = np.zeros((2, n, n))
    Eyx = np.zeros((2, n, n))
    Ex = np.zeros((2, n))
    for a in range(n):
        xs, ys = _hyperdual(x, y, [_unit(2 * n, a), W])
        v = energy(xs, ys)
        Ex[0, a], Ex[1, a] = _coef(v, (1, 0)), _coef(v, (1, 1))
        for b in range(n):
            xs, ys = _hyperdual(x, y, [_unit(2 * n, n + b), _unit(2 * n, a), W])
            v = energy(xs, ys)
            Eyx[0, b, a], Eyx[1, b, a] = _coef(v, (1, 1, 0)), _coef(v, (1, 1, 1))
            if b >= a:
                xs, ys = _hyperdual(x, y, [_unit(2 * n, n + b), _unit(2 * n, n + a), W])
                v = energy(xs, ys)
                g[0, a, b] = g[0, b, a] = _coef(v, (1, 1, 0))
                g[1, a, b] = g[1, b, a] = _coef(v, (1, 1, 1))
    y = np.asarray(y, dtype=float)
    rhs0 = 0.5 * (Eyx[0] @ y - Ex[0])
    rhs1 = 0.5 * (Eyx[1] @ y + Eyx[0] @ w - Ex[1])
    G0 = np.linalg.solve(g[0], rhs0)
    G1 = np.linalg.solve(g[0], rhs1 - g[1] @ G0)
    return G0, G1


def _spray_dual(s: Spray, x, y, w: np.ndarray) -> tuple:
    n = len(x)
    if isinstance(s, MetricSpray):
        return _metric_spray_dual(s.metric.energy, x, y, w)
    if isinstance(s, ProjectiveSpray):
        G0, G1 = _spray_dual(s.parent, x, y, w)
        if s.factor.is_zero:
            return G0, G1
        xs, ys = _hyperdual(x, y, [np.concatenate([np.zeros(n), w])])
        lam = s.factor(xs, ys)
        l0, l1 = _coef(lam, (0,)), _coef(lam, (1,))
        y = np.asarray(y, dtype=float)
        return G0 + l0 * y, G1 + l1 * y + l0 * w
    if isinstance(s, ExplicitSpray):
        xs, ys = _hyperdual(x, y, [np.concatenate([np.zeros(n), w])])
        comps = [c(xs, ys) for c in s.components]
        return np.array([_coef(c, (0,)) for c in comps]), np.array([_coef(c, (1,)) for c in comps])
    raise TypeError(f"no classical oracle path for {type(s).__name__}")


def douglas_spray(s: Spray, x, y) -> np.ndarray:
    """Trace-corrected spray ``D^i = G^i - y^i (dG^m/dy^m) / (n + 1)``."""
    n = len(x)
    G0, trace = None, 0.0
    for m in range(n):
        G, dG = _spray_dual(s, x, y, _unit(n, m))
        G0 = G
        trace += dG[m]
    return G0 - np.asarray(y, dtype=float) * trace / (n + 1)


def classical_douglas(s: Spray, p: EvalPoint, scheme: FDScheme = FDScheme(h0=2e-3)) -> TensorValue:
    """Douglas tensor as the third fiber derivative of the trace-corrected spray."""
    n = p.n
    out = np.zeros((n, n, n, n))
    f = lambda x, y: douglas_spray(s, x, y)  # noqa: E731
    for j, k, l in itertools.combinations_with_replacement(range(n), 3):
        dirs = [_unit(2 * n, n + a) for a in (j, k, l)]
        val = fd_derivative(f, p, dirs, scheme)
        for a, b, c in set(itertools.permutations((j, k, l))):
            out[:, a, b, c] = val
    return TensorValue(
        "Douglas(classical)", out, ("contra", "co", "co", "co"),
        "Douglas[i, j, k, l] = d3/dy^j dy^k dy^l (G^i - y^i tr(dG/dy) / (n + 1))",
        p, (((1, 2, 3), 1),),
    )
