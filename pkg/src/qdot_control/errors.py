class ShapeError(ValueError):
    """Matrix or array shapes do not fit together."""


class PropagationError(RuntimeError):
    """Time stepping failed or drifted out of tolerance."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class OptimizationError(RuntimeError):
    def __init__(self, message, iteration=None):
        super().__init__(message if iteration is None else f"iteration {iteration}: {message}")
        self.iteration = iteration


class ConfigError(ValueError):
    """Invalid configuration document; ``where`` locates the offending field."""

    def __init__(self, message, where=None):
        super().__init__(message if where is None else f"{where}: {message}")
        self.where = where
