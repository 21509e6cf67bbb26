"""Exception hierarchy shared by all modules."""


class QuenchEchoError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QuenchEchoError, ValueError):
    """Input violates a documented precondition."""


class DegenerateError(QuenchEchoError, ArithmeticError):
    """A level crossing makes the requested quantity ill-defined.

    Raised for gapless initial Hamiltonians (no unique ground state), for
    winding numbers and Chern numbers evaluated on a phase boundary, and for
    perturbation sums with a degenerate ground state.
    """


class DomainError(QuenchEchoError, ValueError):
    """Argument outside the mathematical domain of the operation.

    ``surrogate`` carries the value obtained by substituting the smallest
    positive double, so callers that prefer a finite (flagged) number over an
    exception can still use it.
    """

    def __init__(self, message, surrogate=None):
        super().__init__(message)
        self.surrogate = surrogate


class ConsistencyError(QuenchEchoError, ArithmeticError):
    """Internal numerical consistency check failed (e.g. an echo above one)."""
