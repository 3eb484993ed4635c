"""Exception hierarchy shared by every module."""


class FPGError(Exception):
    """Base class for all errors raised by fpg."""


class DomainError(FPGError, ValueError):
    """A primitive was evaluated outside its domain (e.g. 1/0, sqrt(-1))."""


class ArityError(FPGError, ValueError):
    """More derivative directions were requested than the jet depth allows."""


class TruncationError(ArityError):
    """A coefficient was read beyond the order up to which a jet is exact."""


class DimensionError(FPGError, ValueError):
    """Dimension mismatch, or an operation that needs n > 2 was given n <= 2."""


class ExprSyntaxError(FPGError, ValueError):
    """Malformed expression text."""

    def __init__(self, message, line, column, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(sorted(expected))
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifier(FPGError, ValueError):
    """An identifier that is neither a coordinate nor a known primitive."""


class SingularMetric(FPGError, ValueError):
    """Fundamental tensor not invertible at a sample point."""


class HomogeneityError(FPGError, ValueError):
    """A field failed its sampled Euler homogeneity gate."""


class StepUnderflow(FPGError, ValueError):
    """Finite-difference step fell below the usable floor."""


class ConfigError(FPGError, ValueError):
    """Invalid problem configuration."""


class UsageError(FPGError, ValueError):
    """Invalid command-line usage (e.g. unknown tensor name)."""
