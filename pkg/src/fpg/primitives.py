"""The closed primitive set, usable on plain floats and on jets alike.

Scalar fields (metrics, projective factors, spray components) must be
written with these functions so they can be evaluated on jet arguments.
"""

from __future__ import annotations

import math

from . import jet as _jet
from .errors import DomainError
from .jet import Jet

PRIMITIVES = ("sqrt", "exp", "log", "sin", "cos", "atan")


def sqrt(x):
    if isinstance(x, Jet):
        return _jet.sqrt(x)
    if x < 0:
        raise DomainError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        return _jet.exp(x)
    try:
        return math.exp(x)
    except OverflowError as exc:
        raise DomainError(f"exp overflow at {x!r}") from exc


def log(x):
    if isinstance(x, Jet):
        return _jet.log(x)
    if x <= 0:
        raise DomainError(f"log of non-positive value {x!r}")
    return math.log(x)


def sin(x):
    return _jet.sin(x) if isinstance(x, Jet) else math.sin(x)


def cos(x):
    return _jet.cos(x) if isinstance(x, Jet) else math.cos(x)


def atan(x):
    return _jet.atan(x) if isinstance(x, Jet) else math.atan(x)


def ipow(x, m: int):
    if isinstance(x, Jet):
        return _jet.ipow(x, m)
    if m < 0 and x == 0:
        raise DomainError("zero raised to a negative power")
    return float(x) ** m


def div(a, b):
    if not isinstance(b, Jet) and b == 0:
        raise DomainError("division by zero")
    return a / b


FUNCTIONS = {"sqrt": sqrt, "exp": exp, "log": log, "sin": sin, "cos": cos, "atan": atan}
