class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NumericalError(ArithmeticError):
    """An iterative routine failed to converge or bracket its target."""


class TruncationError(DomainError):
    """A truncated point list is too short for the requested accuracy.

    ``required`` carries an estimate of how many points would suffice.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required
