"""Exception hierarchy shared by every module."""


class QProspectError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(QProspectError, ValueError):
    """Input violates a documented precondition (bad shapes, norms, ranges)."""


class NumericalInvariantError(QProspectError, ArithmeticError):
    """A computed result failed one of its own post-condition checks."""
