"""Exception types shared across the engine."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateBoundaryError(DomainError):
    """First-passage problem posed with the start sitting on the boundary."""


class UnsupportedRegimeError(RuntimeError):
    """Closed-form path requested outside the decreasing-z regime."""


class AccuracyError(RuntimeError):
    """A numerical routine could not meet its accuracy target.

    Carries ``residual``, the routine's own estimate of the remaining error.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InfeasibleError(RuntimeError):
    """The wealth constraint cannot be met with the given budget.

    ``minimal_budget`` is the smallest initial budget (w0 plus price
    advantage) for which a feasible portfolio exists; ``minimal_w0`` is the
    corresponding initial wealth once the position's price advantage is
    netted out.
    """

    def __init__(self, message, minimal_budget=None, minimal_w0=None):
        super().__init__(message)
        self.minimal_budget = minimal_budget
        self.minimal_w0 = minimal_w0


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""
