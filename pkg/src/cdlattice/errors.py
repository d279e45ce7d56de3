"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """Lattice or run configuration violates a precondition."""


class UnsupportedPathError(ValueError):
    """Requested a computation path that only exists for other inputs."""


class DomainError(ValueError):
    """Closed-form expression evaluated outside its supported families."""


class SingularityError(ArithmeticError):
    """A formula or propagation step hit a genuine singular point."""


class NotHermitianError(ValueError):
    """Matrix failed the Hermiticity residual check."""


class ConvergenceError(RuntimeError):
    """Iterative refinement did not converge within its budget."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []
