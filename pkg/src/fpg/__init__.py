"""Numerical projective Finsler geometry on a single chart."""

__version__ = "0.1.0"

from .derivatives import EvalPoint, directional_derivative, euler_degree  # noqa: E402
from .errors import (  # noqa: E402
    ArityError,
    ConfigError,
    DimensionError,
    DomainError,
    ExprSyntaxError,
    FPGError,
    HomogeneityError,
    SingularMetric,
    StepUnderflow,
    TruncationError,
    UnknownIdentifier,
    UsageError,
)
from .expr import Expr, evaluate, parse  # noqa: E402
from .metrics import (  # noqa: E402
    FinslerMetric,
    ProjectiveFactor,
    canonical_spray,
    energy,
    fundamental_tensor,
)
from .tensor import TensorValue  # noqa: E402

__all__ = [
    "__version__", "EvalPoint", "directional_derivative", "euler_degree", "Expr", "parse", "evaluate",
    "FinslerMetric", "ProjectiveFactor", "canonical_spray", "energy", "fundamental_tensor", "TensorValue",
    "ArityError", "ConfigError", "DimensionError", "DomainError", "ExprSyntaxError", "FPGError",
    "HomogeneityError", "SingularMetric", "StepUnderflow", "TruncationError", "UnknownIdentifier", "UsageError",
]
