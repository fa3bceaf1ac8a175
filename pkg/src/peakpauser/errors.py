"""Exception types shared across the package."""


class PeakPauserError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(PeakPauserError, ValueError):
    """Malformed or invalid input data.

    ``line`` is the 1-based line number in the offending file when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GapError(DataFormatError):
    """An expected hour is missing and the gap policy forbids gaps."""

    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = missing


class CoverageError(PeakPauserError):
    """The price series does not cover the interval being integrated."""


class ControllerError(PeakPauserError):
    """A VM controller call failed."""


class UnknownInstanceError(ControllerError):
    """The controller does not know the given instance id."""


class ControllerTimeoutError(ControllerError):
    """A controller call exceeded its deadline."""


class ClockError(PeakPauserError):
    """The injected time source misbehaved, e.g. went backwards."""
