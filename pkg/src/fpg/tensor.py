"""Pointwise tensor values with slot signatures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .derivatives import EvalPoint


@dataclass(frozen=True)
class TensorValue:
    """Components of a tensor at one point.

    ``slots`` lists ``"contra"``/``"co"`` per array axis, ``convention``
    documents how the axes map to the arguments of the intrinsic object, and
    ``symmetries`` records index groups (axis tuples) under which the
    components are symmetric (``+1``) or antisymmetric (``-1``).
    """

    name: str
    components: np.ndarray
    slots: tuple
    convention: str
    point: EvalPoint | None = None
    symmetries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.ndim != len(self.slots):
            raise ValueError(f"{self.name}: {comps.ndim} axes but {len(self.slots)} slots")
        object.__setattr__(self, "components", comps)

    @property
    def shape(self) -> tuple:
        return self.components.shape

    def norm(self) -> float:
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    def symmetry_residual(self) -> float:
        """Largest relative violation of the declared (anti)symmetries."""
        worst = 0.0
        scale = 1.0 + self.norm()
        for axes, sign in self.symmetries:
            for perm in itertools.permutations(axes):
                order = list(range(self.components.ndim))
                for a, b in zip(axes, perm):
                    order[a] = b
                permuted = self.components.transpose(order)
                parity = _parity(axes, perm) if sign < 0 else 1
                worst = max(worst, float(np.max(np.abs(self.components - parity * permuted))))
        return worst / scale

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "slots": list(self.slots),
            "convention": self.convention,
            "shape": list(self.shape),
            "components": self.components.tolist(),
        }


def _parity(axes, perm) -> int:
    idx = [axes.index(p) for p in perm]
    sign = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


def relative_residual(lhs, rhs) -> float:
    """``max|lhs - rhs| / (1 + max|lhs| + max|rhs|)``."""
    lhs = np.asarray(getattr(lhs, "components", lhs), dtype=float)
    rhs = np.asarray(getattr(rhs, "components", rhs), dtype=float)
    diff = np.max(np.abs(lhs - rhs)) if lhs.size else 0.0
    scale = 1.0 + (np.max(np.abs(lhs)) if lhs.size else 0.0) + (np.max(np.abs(rhs)) if rhs.size else 0.0)
    return float(diff / scale)
