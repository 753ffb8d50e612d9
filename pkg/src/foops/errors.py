"""Exception hierarchy shared by every foops module."""


class FoopsError(Exception):
    """Base class for all errors raised by foops."""


class InvalidInputError(FoopsError, ValueError):
    """Invalid input such as a non-finite or mis-shaped array."""


class InvalidPreferenceError(InvalidInputError):
    """Preference ray with a non-positive component."""


class UnsupportedConfigurationError(FoopsError, ValueError):
    """A configuration outside the supported regime (e.g. penalty exponent < 1)."""


class UnsupportedDimensionError(FoopsError, ValueError):
    """Operation not available for the given number of objectives or variables."""


class InvalidComparisonError(FoopsError, ValueError):
    """Experiments that cannot be compared (different problems or preferences)."""


class DivergedError(FoopsError, RuntimeError):
    """An iterate became non-finite or left the trust region.

    The partially filled trace is attached so callers can inspect the history
    leading up to the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
