"""Exception hierarchy shared by every module."""


class WosnnError(Exception):
    """Base class for all package errors."""


class ConfigError(WosnnError, ValueError):
    """Invalid or missing configuration value."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class InputError(WosnnError, ValueError):
    """An argument violates an operation's precondition."""


class EstimationError(WosnnError, RuntimeError):
    """A Monte Carlo estimate could not be formed (e.g. no valid paths)."""


class NumericalError(WosnnError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class TrainingError(NumericalError):
    """Training diverged (non-finite loss)."""

    def __init__(self, message, epoch=None):
        self.epoch = epoch
        super().__init__(message)
