"""Exception hierarchy shared across the package."""


class SymPearsonError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SymPearsonError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstructionError(SymPearsonError, ValueError):
    """A distribution object was requested with invalid parameters."""


class NonStationaryError(SymPearsonError, ValueError):
    """AR coefficients do not define a stationary process."""


class SingularDesignError(SymPearsonError, ValueError):
    """The lagged least-squares design matrix is rank deficient."""


class EmptySampleError(SymPearsonError, ValueError):
    """An empirical distribution was requested for an empty sample."""


class NoRootError(SymPearsonError, RuntimeError):
    """The scale estimating equation has no sign change in the search range."""


class TooManyFailuresError(SymPearsonError, RuntimeError):
    """Too many Monte Carlo replicates failed."""


class OracleUnavailableError(SymPearsonError, RuntimeError):
    """Hidden simulation truth was requested for data that has none."""
