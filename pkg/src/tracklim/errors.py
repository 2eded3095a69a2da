"""Exception hierarchy.

Every failure the package can signal derives from :class:`TracklimError`.
Validation problems (bad input data) derive from :class:`ValidationError`,
numerical breakdowns from :class:`NumericalFailure`.
"""


class TracklimError(Exception):
    pass


class ValidationError(TracklimError, ValueError):
    pass


class ContractError(TracklimError):
    """An operation was called outside its stated preconditions."""


class NumericalFailure(TracklimError, ArithmeticError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


# --- validation -----------------------------------------------------------

class ImproperError(ValidationError):
    pass


class PoleProximityError(ValidationError):
    pass


class ImaginaryAxisError(ValidationError):
    pass


class NotDistinctError(ValidationError):
    pass


class NotSimpleError(ValidationError):
    pass


class CoincidentPoleZeroError(ValidationError):
    pass


class InterpolationPoleError(ValidationError):
    """The reference transform has a pole at an interpolation point."""


class InfeasibleProblemError(ValidationError):
    pass


class EnvelopeError(ValidationError):
    pass


class ReferenceSignError(ValidationError):
    """Undershoot requested for a reference that takes negative values."""


# --- numerics -------------------------------------------------------------

class IllConditionedError(NumericalFailure):
    pass


class CertificateRejected(NumericalFailure):
    def __init__(self, message, violation, location):
        super().__init__(message)
        self.violation = violation
        self.location = location


class RefinementError(NumericalFailure):
    def __init__(self, message, last_values):
        super().__init__(message, trace=list(last_values))
        self.last_values = tuple(last_values)
