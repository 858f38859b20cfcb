"""Exception types shared across the package."""


class DescriptorMismatch(ValueError):
    """Operands live over different algebra or module descriptors."""


class NotPositiveError(ValueError):
    """Element is not positive within the requested tolerance."""


class NotNormalError(ValueError):
    """Element is not normal within the requested tolerance."""


class NotAbelianError(ValueError):
    """An operation that needs a commutative algebra met a matrix block."""


class UnsupportedRegimeError(ValueError):
    """Control exponents fall in the regime with no known scaling constant."""


class CannotCertifyError(RuntimeError):
    """The candidate map still violates the control bound after all retries."""

    def __init__(self, message: str, *, delta: float = 0.0, halvings: int = 0,
                 worst_excess: float = 0.0):
        super().__init__(message)
        self.delta = delta
        self.halvings = halvings
        self.worst_excess = worst_excess


class NoAccumulationPointError(RuntimeError):
    """No admissible cluster among the scaled iterates."""

    def __init__(self, message: str, *, best_size: int = 0, tol: float = 0.0):
        super().__init__(message)
        self.best_size = best_size
        self.tol = tol


class ConfigError(ValueError):
    """Experiment configuration is missing, malformed, or inconsistent."""
