class EEGError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EEGError, ValueError):
    """Bad input: wrong shapes, invalid parameters, malformed files."""


class ConvergenceError(EEGError, RuntimeError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
