"""Exception types raised across the package."""


class MenuSizeError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MenuSizeError, ValueError):
    pass


class SupportTooLarge(MenuSizeError):
    """An explicit expansion of a product distribution would exceed its limit."""


class ZeroMass(MenuSizeError):
    """Conditioning on an event that carries no probability."""


class GuardExceeded(MenuSizeError):
    """A problem is larger than the configured enumeration or LP guard."""


class SolverFailure(MenuSizeError):
    """The LP solver did not return a trustworthy optimum."""


class PreconditionError(MenuSizeError, ValueError):
    """Inputs violate the hypotheses required by a transformation."""


class NonMonotoneAllocation(MenuSizeError):
    """A single-item menu whose allocation curve decreases somewhere (not IC)."""
