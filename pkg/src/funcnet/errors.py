"""Exception hierarchy shared across the package."""


class FuncnetError(Exception):
    """Base class for all package errors."""


class ValidationError(FuncnetError):
    """Bad user input: shapes, indices, flags, file contents."""


class DomainError(ValidationError):
    """An evaluation point lies outside a basis system's domain."""


class NumericalError(FuncnetError):
    """A computation failed numerically (rank deficiency, divergence)."""
