"""Exception types shared across the package."""

from __future__ import annotations


class QszilardError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(QszilardError, ValueError):
    """A physical parameter is outside its allowed domain."""


class EmptyBasisError(QszilardError, ValueError):
    """The energy cutoff excludes every Fock state."""


class TruncationError(QszilardError, RuntimeError):
    """A retained spectrum is too short for the requested temperature.

    Carries a hint describing how to escalate (more levels / larger basis).
    """

    def __init__(self, message: str, *, hint: str | None = None):
        super().__init__(message if hint is None else f"{message} ({hint})")
        self.hint = hint


class ConvergenceError(QszilardError, RuntimeError):
    """An iterative computation failed to reach its tolerance.

    ``residual`` holds the best achieved figure of merit and ``payload``
    whatever partial result is still useful for diagnostics.
    """

    def __init__(self, message: str, *, residual: float | None = None, payload=None):
        super().__init__(message)
        self.residual = residual
        self.payload = payload
