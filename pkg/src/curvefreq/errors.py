"""Exception types shared across modules."""

from __future__ import annotations

__all__ = ["CurveFreqError", "ValidationError", "GuardError"]


class CurveFreqError(Exception):
    """Base class for package errors."""


class ValidationError(CurveFreqError, ValueError):
    """Invalid input: malformed data, violated invariant, unknown name.

    ``errors`` carries one message per violated condition.
    """

    def __init__(self, message: str | list[str]):
        if isinstance(message, list):
            self.errors = list(message)
            message = "; ".join(message)
        else:
            self.errors = [message]
        super().__init__(message)


class GuardError(CurveFreqError, RuntimeError):
    """A computation refused because it exceeds a desk-scale size guard."""
