"""Exception hierarchy shared by all jforge modules."""


class JForgeError(Exception):
    """Base class for every error raised by the library."""


class ChartMismatchError(JForgeError):
    """Two operands live on different charts."""


class DegreeError(JForgeError):
    """An operand has a tensor degree the operation cannot accept."""


class PoleError(JForgeError):
    """A Laurent monomial with a negative exponent was evaluated at zero."""


class SplitError(JForgeError):
    """The chart carries no base/fiber split (or an unusable one)."""


class PreconditionError(JForgeError):
    """Input data violates the precondition of a construction.

    ``witness`` carries whatever exhibits the failure (a generator pair,
    a residual tensor, ...) so callers can report it.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class VerificationError(JForgeError):
    """A self-check on a constructed output failed.

    This signals a bug rather than bad input.
    """
