"""Exception hierarchy shared across the package."""


class VHConnectError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(VHConnectError, ValueError):
    """An argument violates the preconditions of an operation."""


class InvalidBoxError(InvalidInputError):
    """A bounding box has non-positive width or height."""


class ParseError(VHConnectError, ValueError):
    """A CSV or image file could not be parsed.

    ``line`` carries the 1-based line number when the failure is tied to one.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigurationError(VHConnectError):
    """Inconsistent run configuration (unknown source tags, missing sizes...)."""
