"""Exception types shared across the package."""

from __future__ import annotations


class ExtremeFptError(Exception):
    """Base class for all package errors."""


class DomainError(ExtremeFptError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidityError(ExtremeFptError):
    """A requested quantity falls outside the short-time trust region.

    Carries the offending cumulative exit probability and, when raised
    mid-run by a sampler, the prefix of arrivals generated so far.
    """

    def __init__(self, message: str, *, f_value: float | None = None, partial=None):
        super().__init__(message)
        self.f_value = f_value
        self.partial = list(partial) if partial is not None else []


class BracketError(ExtremeFptError):
    """Root bracketing failed; reports the offending target value."""

    def __init__(self, message: str, *, target: float | None = None):
        super().__init__(message)
        self.target = target
