"""Exception and warning types raised by the solver."""


class TripleDeckError(Exception):
    """Base class for all solver errors."""


class DomainError(TripleDeckError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class NonFiniteError(TripleDeckError, ValueError):
    """A NaN or infinity was supplied or produced."""


class ShapeError(TripleDeckError, ValueError):
    """Array dimensions do not match the grid."""


class DegenerateModeError(TripleDeckError, ValueError):
    """A negative-order multiplier was applied to a field with a nonzero mean mode."""


class ConvergenceError(TripleDeckError, RuntimeError):
    """An inner root-finding or shooting procedure failed to converge."""


class ResidualTooLargeError(TripleDeckError, RuntimeError):
    """A per-mode ODE solve left a residual above its bound (under-resolution)."""


class SingularSystemError(TripleDeckError, RuntimeError):
    """A zero pivot was met during tridiagonal elimination."""


class NearSingularMultiplierError(TripleDeckError, RuntimeError):
    """The elliptic multiplier came too close to zero on some mode."""

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class InvariantViolationError(TripleDeckError, RuntimeError):
    """A post-condition of a solve failed."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DivergenceError(TripleDeckError, RuntimeError):
    """The fixed-point iteration grew for several consecutive steps."""

    def __init__(self, message, history=None, margin=None):
        super().__init__(message)
        self.history = history
        self.margin = margin


class ConfigError(TripleDeckError, ValueError):
    """A run configuration is malformed.

    Parameters
    ----------
    violations : list of str
        Every problem found, not just the first.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AliasWarning(UserWarning):
    """Spectral tail energy before dealiasing exceeded its threshold."""
