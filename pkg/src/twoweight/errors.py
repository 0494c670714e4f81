"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnboundedConjugateError(ArithmeticError):
    """The complementary Young function is infinite at the requested point."""


class SparsityError(ValueError):
    """A cube family violates the half-measure packing condition."""


class DegenerateInputError(ValueError):
    """The input carries no mass where the construction needs some."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""
