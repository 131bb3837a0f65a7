class BlindPCAError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 2


class ArgumentError(BlindPCAError, ValueError):
    pass


class InvalidDataError(BlindPCAError, ValueError):
    pass


class NumericError(BlindPCAError, ArithmeticError):
    exit_code = 3


class ConvergenceError(NumericError):
    def __init__(self, message: str, iterations: int | None = None):
        super().__init__(message if iterations is None else f"{message} (iterations={iterations})")
        self.iterations = iterations
