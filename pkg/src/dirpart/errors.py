"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid user-supplied data or parameters."""


class DegenerateInputError(InputError):
    """Input is well-formed but the requested quantity is undefined on it."""


class ConvergenceError(RuntimeError):
    """An iterative eigensolver did not reach the requested residual."""

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual
