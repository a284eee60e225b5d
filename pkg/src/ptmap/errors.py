"""Exception types shared across the package."""


class PtmapError(Exception):
    """Base class for all package errors."""


class InputError(PtmapError, ValueError):
    """Malformed or inconsistent input (shapes, membership, configuration)."""


class DomainError(PtmapError, ValueError):
    """Argument outside the region where an operation is defined."""


class NumericalError(PtmapError, ArithmeticError):
    """An iteration failed to converge or a solution blew up."""


class ConsistencyError(PtmapError):
    """A well-definedness check failed (e.g. ambiguous orbit representatives)."""
