"""Exception types raised across the package."""


class DelayCorrError(Exception):
    """Base class for all package errors."""


class NumericalError(DelayCorrError, ArithmeticError):
    """A numerical routine could not produce a trustworthy value."""


class DivergenceError(NumericalError):
    pass


class NonFiniteError(NumericalError):
    pass


class NotPsdError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


class DegenerateError(NumericalError):
    pass


class ZeroChannelError(NumericalError):
    pass


class ModulusError(DelayCorrError, ValueError):
    pass


class EmptyError(DelayCorrError, ValueError):
    pass


class GridError(DelayCorrError, ValueError):
    pass


class ConfigError(DelayCorrError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
