"""Exceptions raised by hypoprop.

All of them derive from :class:`HypopropError`, which is a
:class:`ValueError`, so callers that only care about bad input can keep
catching ``ValueError``.
"""

__all__ = [
    "HypopropError",
    "InvalidInputError",
    "DomainError",
    "SingularityError",
    "InconsistencyError",
    "BranchError",
    "UnsupportedLimitError",
    "InvariantViolationError",
    "FieldStateError",
    "CoverageError",
    "ResolutionError",
    "SharpnessViolationError",
]


class HypopropError(ValueError):
    """Base class for all hypoprop errors."""


class InvalidInputError(HypopropError):
    """Malformed matrices, vectors or JSON payloads."""


class DomainError(HypopropError):
    """A parameter lies outside the domain of an operation."""


class SingularityError(HypopropError):
    """The covariance matrix is singular, i.e. the system is not
    hypoelliptic."""


class InconsistencyError(HypopropError):
    """The spectral and the Kalman rank criteria disagree."""


class BranchError(HypopropError):
    """No analytic square root branch exists for the given matrix."""


class UnsupportedLimitError(HypopropError):
    """A limiting case that is deliberately not handled."""


class InvariantViolationError(HypopropError):
    """An internal invariant was violated. This indicates a bug."""


class FieldStateError(HypopropError):
    """A grid field is in the wrong space for the requested operation."""


class CoverageError(HypopropError):
    """Flowed evaluation points leave the sample box."""


class ResolutionError(HypopropError):
    """The grid is too coarse to resolve an oscillatory factor."""


class SharpnessViolationError(HypopropError):
    """A measured dispersive ratio or Hardy product exceeds its sharp
    bound."""
