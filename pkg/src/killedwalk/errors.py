"""Exception types shared across the package."""


class ModelError(ValueError):
    """A jump law or model file is malformed."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget.

    ``residual`` carries the last residual seen, for diagnostics.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual
