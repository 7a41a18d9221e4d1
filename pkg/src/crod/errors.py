"""Exception types shared across the package."""


class CrodError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(CrodError, ValueError):
    """A scalar argument is outside its admissible range."""


class DimensionError(CrodError, ValueError):
    """Array shapes do not conform."""


class ConfigError(CrodError, ValueError):
    """Invalid, unknown, or missing configuration keys."""


class NumericError(CrodError, RuntimeError):
    """A numeric routine failed; carries diagnostics in ``details``."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class PoleError(NumericError):
    """Evaluation point hit a pole of a spectral integral."""


class IllPosedInstanceError(NumericError):
    """Instance violates the well-posedness needed by a coefficient rule."""


class ConvergenceError(NumericError):
    """Iterative solver ran out of iterations; carries the best iterate."""

    def __init__(self, message, best=None, kkt_violation=None, **details):
        super().__init__(message, kkt_violation=kkt_violation, **details)
        self.best = best
        self.kkt_violation = kkt_violation
