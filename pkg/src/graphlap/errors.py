"""Exception types shared across the package."""


class ShapeMismatch(ValueError):
    """Operands or operator/field shapes are incompatible."""


class NonFiniteError(ArithmeticError):
    """A field picked up NaN or Inf entries."""


class ConfigurationError(ValueError):
    """A parameter set is invalid or inconsistent."""


class ConvergenceError(RuntimeError):
    """An inner iterative solve ran out of iterations.

    Carries the last relative residual in ``residual``.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DivergenceError(RuntimeError):
    """The outer iteration produced non-finite iterates.

    Carries the trace recorded up to the failure in ``trace``.
    """

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace
