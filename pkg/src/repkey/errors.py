class DomainError(ValueError):
    """An argument lies outside the domain of the model."""


class DegenerateError(ArithmeticError):
    """A success probability vanished, so renormalisation is impossible."""


class InvariantError(AssertionError):
    """An internal consistency check failed."""
