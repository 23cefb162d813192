"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Input data or parameters violate a documented precondition."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (factorization, non-finite values)."""


class UndefinedMetricError(ValueError):
    """A metric is mathematically undefined for the given input."""
