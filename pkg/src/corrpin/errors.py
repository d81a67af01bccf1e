"""Exception types shared across the package."""


class InvalidParameter(ValueError):
    """A parameter is outside the domain where the model is defined."""


class NumericalFailure(RuntimeError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NumericalInconsistency(ArithmeticError):
    """A closed-form expression was evaluated outside its valid range."""
