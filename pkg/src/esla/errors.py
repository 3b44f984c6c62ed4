"""Exception and warning types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument lies outside the documented domain of an operation."""


class SkewnessUnattainableError(ValueError):
    """The requested skewness cannot be produced by the target family.

    ``best_effort`` carries a clamped fit when one could be computed.
    """

    def __init__(self, message, best_effort=None):
        super().__init__(message)
        self.best_effort = best_effort


class DomainError(ValueError):
    """An interpolant was queried outside its tabulated domain."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not converge.

    ``diagnostics`` holds the last iterate information.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ExtractionError(RuntimeError):
    """Finite-difference extraction of expansion coefficients broke down."""


class UnsupportedDimensionError(ValueError):
    """A brute-force routine was asked for too many dimensions."""


class AmbiguousModeError(ValueError):
    """A tabulated density has no unique maximum."""


class McmcDiagnosticsError(RuntimeError):
    """The sampler finished with an unusable acceptance rate."""

    def __init__(self, message, acceptance=None):
        super().__init__(message)
        self.acceptance = acceptance


class TauRangeWarning(UserWarning):
    """A hidden-mean value beyond the supported range was clamped."""
