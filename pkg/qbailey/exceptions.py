"""Exceptions raised by the q-series engine."""


class QSeriesError(Exception):
    """Base class for all engine errors."""


class NonUnitLeadingCoefficient(QSeriesError):
    """Raised when inverting a series whose lowest coefficient is not +1 or -1."""


class OrderExceeded(QSeriesError):
    """Raised when a coefficient beyond the known truncation window is requested."""


class NonTerminatingProduct(QSeriesError):
    """Raised for an infinite product whose factors never leave the window."""


class NonTerminatingSum(QSeriesError):
    """Raised for an infinite sum whose terms do not move past the window."""


class EnumerationBoundUnverified(QSeriesError):
    """Raised when the shell certificate for negative occupation numbers fails."""


class ModulusMismatch(QSeriesError):
    """Raised when pairing sequences relative to different values of a."""


class InvalidParameters(QSeriesError, ValueError):
    """Raised when parameters violate a parity or range condition."""
