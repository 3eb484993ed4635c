"""Evaluation points and jet-based directional derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ArityError, DimensionError, DomainError
from .jet import Basis, Jet

#: Default depth of the nested-dual tower used by :func:`directional_derivative`.
DEFAULT_MAX_DEPTH = 6

# A scalar field is any callable f(x, y) -> float | Jet written with fpg.primitives.
ScalarField = Callable[[Sequence, Sequence], object]


@dataclass(frozen=True)
class EvalPoint:
    """Chart point ``(x, y)`` on the slit tangent bundle."""

    x: tuple
    y: tuple

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        if len(x) != len(y):
            raise DimensionError(f"x has {len(x)} coordinates but y has {len(y)}")
        if not np.any(np.asarray(y)):
            raise DomainError("fiber coordinate y must be nonzero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def xa(self) -> np.ndarray:
        return np.asarray(self.x)

    @property
    def ya(self) -> np.ndarray:
        return np.asarray(self.y)

    def scaled(self, t: float) -> "EvalPoint":
        return EvalPoint(self.x, tuple(t * v for v in self.y))


def taylor_coordinates(basis: Basis, p: EvalPoint):
    """Coordinate jets ``x^i = x0^i + dx^i``, ``y^i = y0^i + dy^i`` on a Taylor basis."""
    n = p.n
    if basis.nvars != 2 * n:
        raise DimensionError("basis does not match the point dimension")
    xs = [Jet.variable(basis, p.x[i], _unit(2 * n, i)) for i in range(n)]
    ys = [Jet.variable(basis, p.y[i], _unit(2 * n, n + i)) for i in range(n)]
    return xs, ys


def _unit(m: int, i: int) -> list:
    e = [0.0] * m
    e[i] = 1.0
    return e


def _tagged_coordinates(p: EvalPoint, dirs) -> tuple[list, list]:
    depth = len(dirs)
    basis = Basis.hyperdual(depth)
    base = p.x + p.y
    coords = [Jet.variable(basis, base[a], [d[a] for d in dirs]) for a in range(2 * p.n)]
    return coords[: p.n], coords[p.n :]


def directional_derivative(
    f: ScalarField, p: EvalPoint, dirs: Sequence, max_depth: int = DEFAULT_MAX_DEPTH
) -> float:
    """``d^k f`` along the 2n-vectors ``dirs`` (x components first) at ``p``.

    Each direction is one first-order dual tag, so the result is exact up to
    roundoff for any composition of primitives.
    """
    dirs = [np.asarray(d, dtype=float) for d in dirs]
    if not dirs:
        raise ArityError("at least one direction is required")
    if len(dirs) > max_depth:
        raise ArityError(f"{len(dirs)} directions exceed the configured depth {max_depth}")
    for d in dirs:
        if d.shape != (2 * p.n,):
            raise DimensionError(f"direction must have {2 * p.n} components, got {d.shape}")
    xs, ys = _tagged_coordinates(p, dirs)
    out = f(xs, ys)
    if not isinstance(out, Jet):
        return 0.0
    return out.coefficient((1,) * len(dirs))


def euler_degree(f: ScalarField, p: EvalPoint) -> float:
    """``(y . grad_y f) / f`` at ``p``; equals r when f is positively homogeneous of degree r."""
    direction = np.concatenate([np.zeros(p.n), p.ya])
    xs, ys = _tagged_coordinates(p, [direction])
    out = f(xs, ys)
    if not isinstance(out, Jet):
        value, slope = float(out), 0.0
    else:
        value, slope = out.coefficient((0,)), out.coefficient((1,))
    if value == 0.0:
        raise DomainError("Euler degree undefined where the field vanishes")
    return slope / value
