"""Exception types shared across the package."""


class ChevronError(Exception):
    """Base class for all package errors."""


class ParameterError(ChevronError, ValueError):
    """A parameter violates its admissible range."""


class ShapeError(ChevronError, ValueError):
    """Array shape does not match the grid it is paired with."""


class NonFiniteStateError(ChevronError, FloatingPointError):
    """A field contains NaN or inf values."""


class StepTooLargeError(ChevronError, ValueError):
    """Requested time step reaches or exceeds the nonlinear blow-up horizon."""


class ResolutionError(ChevronError, ValueError):
    """The grid does not carry enough modes to satisfy a spectral criterion."""


class UndefinedRateError(ChevronError, ValueError):
    """A decay rate was requested from records with no positive norms."""


class ConfigError(ChevronError, ValueError):
    """Malformed or invalid run configuration."""
