"""Exception types shared across the package."""


class NatProofError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(NatProofError, ValueError):
    """An input has the wrong length, arity or index range."""


class BudgetError(NatProofError, RuntimeError):
    """A configured size, memory or node budget would be exceeded."""


class NotFoundError(NatProofError, LookupError):
    """A search over a finite range came up empty."""


class ConsistencyError(NatProofError, AssertionError):
    """Internal invariant broken. Reaching this is a bug."""
