"""Exception types shared across the package."""


class SmoothKrylovError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(SmoothKrylovError, ValueError):
    """Operand shapes are incompatible for the requested operation."""

    def __init__(self, message, *, expected=None, got=None):
        if expected is not None or got is not None:
            message = f"{message} (expected {expected}, got {got})"
        super().__init__(message)
        self.expected = expected
        self.got = got


class BreakdownError(SmoothKrylovError, RuntimeError):
    """A recurrence scalar or pivot became too small to divide by safely.

    Attributes
    ----------
    quantity : str
        Name of the scalar or factor that died.
    iteration : int or None
        Iteration index at which the breakdown occurred (None for
        failures outside an iteration loop, e.g. a standalone solve).
    magnitude : float or None
        Absolute value of the offending quantity.
    history : ConvergenceHistory or None
        Attached by solvers so callers can inspect the partial run.
    """

    def __init__(self, message, *, quantity="", iteration=None, magnitude=None):
        super().__init__(message)
        self.quantity = quantity
        self.iteration = iteration
        self.magnitude = magnitude
        self.history = None

    def __str__(self):
        base = super().__str__()
        if self.iteration is not None:
            return f"{base} [iteration {self.iteration}]"
        return base


class XiSingularError(BreakdownError):
    """The triangular residual factor could not be inverted.

    Raised by the residual-orthonormalizing block solver when the
    back-solve against the triangular factor fails.  The documented
    remedy is to rerun with ``smoothing="cirs_switched"`` so the
    inversion is skipped once the residual is small relative to theta.
    """


class MatrixMarketParseError(SmoothKrylovError, ValueError):
    """A Matrix Market file violated the supported subset of the format."""

    def __init__(self, message, *, path=None, line=None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
        if line is not None:
            prefix = f"{prefix}{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
        self.path = path
        self.line = line


class ConfigurationError(SmoothKrylovError, ValueError):
    """Invalid solver, experiment, or command-line configuration."""
