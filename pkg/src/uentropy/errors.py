"""Exception types shared across the package."""


class UEntropyError(Exception):
    """Base class for all package errors."""


class DomainMismatchError(UEntropyError, ValueError):
    """Objects built over different carriers were combined."""


class PreconditionError(UEntropyError, ValueError):
    """An operation was called outside its documented domain."""


class MissingMetricError(PreconditionError):
    pass


class NotFoundError(UEntropyError, LookupError):
    """A search over a finite family found no qualifying member."""

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence


class PropertyViolation(UEntropyError, AssertionError):
    """A property that must hold on every finite model was violated.

    This always indicates a bug, never an accepted outcome.
    """

    def __init__(self, message, evidence=None):
        super().__init__(message)
        self.evidence = evidence


class ConfigError(UEntropyError, ValueError):
    pass
