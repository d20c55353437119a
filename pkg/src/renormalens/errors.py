"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs (CLI exit code 2) and
:class:`NumericalError` for failures during a computation (CLI exit code 3).
"""


class RenormalensError(Exception):
    """Base class for all library errors."""


class ValidationError(RenormalensError, ValueError):
    """Input violates a documented precondition or type invariant."""


class NumericalError(RenormalensError, ArithmeticError):
    """A computation could not be completed to the requested accuracy."""


class NonNormalizable(ValidationError):
    pass


class GridTooNarrow(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonPositiveState(ValidationError):
    pass


class InvalidSigma(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class InvalidChannel(ValidationError):
    pass


class ZeroFeature(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class SingularX(ValidationError):
    pass


class ModeCouplingDetected(ValidationError):
    pass


class BasisTooLarge(ValidationError):
    pass


class UnsupportedInteraction(ValidationError):
    pass


class TruncationMismatch(ValidationError):
    pass


class IncompleteSpan(NumericalError):
    pass


class DegeneracyUnresolved(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass
