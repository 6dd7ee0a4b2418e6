"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's preconditions."""


class DivergenceError(RuntimeError):
    """Logistic training produced a non-finite loss it could not recover from."""

    def __init__(self, iteration: int, message: str | None = None):
        self.iteration = iteration
        super().__init__(message or f"non-finite training loss at iteration {iteration}")
