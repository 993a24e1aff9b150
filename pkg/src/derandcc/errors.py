"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid or infeasible parameters."""


class ModelViolationError(RuntimeError):
    """A communication primitive was used outside its cost-model contract."""


class QuotaError(ModelViolationError):
    """A routing quota was exceeded."""

    def __init__(self, node, message):
        super().__init__(message)
        self.node = node


class BudgetError(RuntimeError):
    """Seed enumeration would exceed the configured budget."""


class InfeasibilityError(RuntimeError):
    """A feasibility threshold was violated before derandomization started."""

    def __init__(self, value, message=None):
        super().__init__(message or f"estimator infeasible: unconditioned value {value}")
        self.value = value


class BoundViolation(RuntimeError):
    """A certified runtime bound did not hold."""
