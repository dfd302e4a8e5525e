"""Exception types shared across the package."""


class DerainError(Exception):
    """Base class for all package errors."""


class InvalidImageError(DerainError):
    """Input image violates a precondition (shape, finiteness, range)."""


class ImageIOError(DerainError):
    """An image file could not be read or written."""


class NoSignalError(DerainError):
    """Gradient content too weak to estimate a streak direction."""


class NumericError(DerainError):
    """A solver produced a non-finite intermediate value."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(DerainError):
    """A run configuration failed validation."""
