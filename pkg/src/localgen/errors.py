"""Exception hierarchy.

Validation and domain problems derive from :class:`ValueError`; numerical
failures derive from :class:`ArithmeticError`.  The CLI maps the two families
onto distinct exit codes.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class DimensionError(ValidationError):
    """Operand shapes are incompatible."""


class DomainError(ValidationError):
    """Time argument outside the domain of a family (e.g. t < t0)."""


class NumericalError(ArithmeticError):
    """A numerical procedure failed or produced untrustworthy output."""


class NumericalRangeError(NumericalError):
    """Result overflowed or is not finite."""


class StiffnessError(NumericalError):
    """Adaptive step size underflowed.

    Attributes
    ----------
    t : float
        Time at which the integrator gave up.
    """

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"step size underflow at t={self.t!r}")


class SingularityError(NumericalError):
    """A coefficient that must be nonzero vanished."""


class ConsistencyError(NumericalError):
    """Two independent evaluation routes disagree beyond tolerance.

    Both results are kept on the exception for inspection.
    """

    def __init__(self, message, first, second, deviation):
        self.first = first
        self.second = second
        self.deviation = deviation
        super().__init__(f"{message} (deviation {deviation:.3e})")
