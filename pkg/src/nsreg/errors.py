"""Exception hierarchy.

Validation problems (bad exponents, bad scales, malformed inputs) derive from
:class:`ValidationError`; failures discovered while computing (NaN, blow-up)
derive from :class:`NumericalError`.  The CLI maps them to exit codes 1 and 2.
"""


class NsregError(Exception):
    """Base class for all package errors."""


class ValidationError(NsregError, ValueError):
    """An input violates an operation's precondition."""


class ExponentError(ValidationError):
    """An exponent pair violates the relation or range a check requires."""


class ScaleError(ValidationError):
    """A radius or scale ladder is incompatible with the field."""


class FieldFormatError(ValidationError):
    """A field directory on disk is malformed or truncated."""


class NumericalError(NsregError, ArithmeticError):
    """A computation produced non-finite values or a violated bound."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
