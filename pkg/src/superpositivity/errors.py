"""Exception hierarchy shared by every module in the package."""


class SuperpositivityError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SuperpositivityError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class PoleError(DomainError):
    """The function has a pole at the requested point."""


class AccuracyError(SuperpositivityError, ArithmeticError):
    """A numerical procedure failed to reach its requested tolerance.

    The best available estimate is attached so that callers can decide
    whether to use it anyway.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class IncompleteDataError(SuperpositivityError, LookupError):
    """A coefficient table does not cover the indices an operation needs."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ValidationError(SuperpositivityError, ValueError):
    """Ingested data violates a structural invariant."""
