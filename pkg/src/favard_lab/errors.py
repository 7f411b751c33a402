"""Exception types shared across the package."""


class FavardLabError(Exception):
    """Base class for all package errors."""


class ValidationError(FavardLabError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(FavardLabError, RuntimeError):
    """The requested problem size exceeds a memory or time guard."""
