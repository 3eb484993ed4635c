"""Seeded sampling of the working domain (box in x, annulus in y)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .derivatives import EvalPoint
from .errors import DimensionError


@dataclass(frozen=True)
class WorkingDomain:
    x_low: tuple
    x_high: tuple
    y_min: float = 0.1
    y_max: float = 10.0

    def __post_init__(self):
        if len(self.x_low) != len(self.x_high):
            raise DimensionError("box corners have different dimensions")
        if not 0 < self.y_min <= self.y_max:
            raise ValueError("need 0 < y_min <= y_max")

    @classmethod
    def cube(cls, n: int, half_width: float = 0.5, y_min: float = 0.1, y_max: float = 10.0):
        return cls((-half_width,) * n, (half_width,) * n, y_min, y_max)

    @property
    def n(self) -> int:
        return len(self.x_low)


def sample_x(domain: WorkingDomain, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(domain.x_low, domain.x_high, size=(count, domain.n))


def sample_points(domain: WorkingDomain, count: int, seed: int) -> list[EvalPoint]:
    """``count`` reproducible points; ``|y|`` is log-uniform in ``[y_min, y_max]``."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(domain.x_low, domain.x_high, size=(count, domain.n))
    dirs = rng.normal(size=(count, domain.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.exp(rng.uniform(np.log(domain.y_min), np.log(domain.y_max), size=count))
    return [EvalPoint(tuple(x), tuple(r * d)) for x, d, r in zip(xs, dirs, radii)]
