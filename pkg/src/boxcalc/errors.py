"""Shared exception types."""


class BoxcalcError(Exception):
    """Base class for all library errors."""


class DomainError(BoxcalcError):
    """Invalid numeric input: bad geometry, out-of-domain point, singular map."""


class BudgetExceededError(DomainError):
    """A quadrature request would exceed its evaluation budget."""


class GaugeDependenceError(DomainError):
    """A term declared constant along an axis turned out to vary along it."""


class InternalCheckError(BoxcalcError):
    """An internal consistency assertion failed; indicates a bug, not bad input."""
