"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class WaverobeError(Exception):
    exit_code = 1


class InputError(WaverobeError, ValueError):
    """Malformed or too-short input data, bad arguments."""

    exit_code = 2


class ConfigurationError(InputError):
    """Unsupported configuration (e.g. wavelet order)."""


class RangeError(InputError):
    """Requested scales are not available in the pyramid."""


class NumericError(WaverobeError, ArithmeticError):
    """Numerical procedure failed (quadrature, linear algebra, embedding)."""

    exit_code = 3


class DomainError(NumericError, ValueError):
    """Parameter outside the domain where a quantity is defined."""


class EstimationError(NumericError):
    """Estimate cannot be formed, e.g. a zero scale-spectrum value."""

    def __init__(self, message, scale=None):
        super().__init__(message)
        self.scale = scale


class ExperimentError(WaverobeError):
    exit_code = 4
