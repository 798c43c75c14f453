"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PauliseqError(Exception):
    exit_code = 1


class InvalidInputError(PauliseqError, ValueError):
    """Malformed operator, label, spec or configuration."""

    exit_code = 2


class DimensionError(InvalidInputError):
    """Matrix shape is not square, not a power of two, or mismatched."""


class DenseLimitError(InvalidInputError):
    """Qubit count exceeds the configured dense-matrix limit."""


class NumericalError(PauliseqError, ArithmeticError):
    exit_code = 3


class NoLeverageError(NumericalError):
    """Both coefficients of a pivot pair vanish, so the angle is undefined."""


class NoRealAngleError(NumericalError):
    """No real rotation angle zeroes the requested target coefficient."""


class StagnationError(NumericalError):
    """The greedy reduction stopped making progress.

    ``trace`` holds the steps taken before giving up.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ResidualError(NumericalError):
    """A result failed its residual or fidelity gate."""
