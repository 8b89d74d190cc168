class FanoBoundError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(FanoBoundError, ValueError):
    """Input is well-formed but violates a mathematical constraint (row sums, loss range, ...)."""


class InstanceFormatError(FanoBoundError, ValueError):
    """An instance or spec file is missing a field or has the wrong shape/type."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class TranscriptCapError(ValidationError):
    """The bandit transcript space exceeds the enumeration cap."""
