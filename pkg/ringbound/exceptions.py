"""
Error types shared by the library and the command line runner
"""


class RingBoundError(Exception):
    """Base class for every error raised by ringbound."""


class ValidationError(RingBoundError, ValueError):
    """An input violates a precondition (bad radius, exponent, config key, ...)."""


class GridFormatError(ValidationError):
    """A sampled-grid file does not follow the documented layout."""


class NumericalFailure(RingBoundError, RuntimeError):
    """A computation could not produce a usable result (empty certificate, no convergence)."""
