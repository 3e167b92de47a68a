"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "KPlaneError",
    "DivergenceError",
    "TailDivergenceError",
    "UndefinedRatioError",
    "ProfileFormatError",
]


class KPlaneError(Exception):
    """Base class for errors raised by this package."""


class DivergenceError(KPlaneError, ValueError):
    """An integral or measure that the requested operation needs is infinite."""


class TailDivergenceError(DivergenceError):
    """The declared power tail makes an integral diverge at infinity.

    Carries enough context in the message to see which exponent combination
    failed; callers that want to branch on this hold the admissibility
    condition themselves (tail_exponent * p > weight_exponent and so on).
    """


class UndefinedRatioError(KPlaneError, ZeroDivisionError):
    """A normalized quantity was requested for an identically zero input."""


class ProfileFormatError(KPlaneError, ValueError):
    """A profile or field file failed to parse; message includes the location."""
