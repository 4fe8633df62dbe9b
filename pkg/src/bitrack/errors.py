"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid topology, parameters or run configuration.

    ``path`` names the offending config field when the error comes from
    parsing a config document.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalError(ArithmeticError):
    """A linear-algebra step could not be carried out reliably."""

    def __init__(self, message, condition=None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)


class RunDiverged(RuntimeError):
    """A simulation produced a non-finite value or broke a state bound."""

    def __init__(self, message, step):
        self.step = step
        super().__init__(f"step {step}: {message}")
