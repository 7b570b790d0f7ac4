"""Exception types raised across the engine."""


class Noether2Error(Exception):
    """Base class for all engine errors."""


class EvaluationError(Noether2Error):
    """A numeric evaluation failed; callers typically resample."""


class DivisionByZero(EvaluationError, ZeroDivisionError):
    pass


class DomainError(EvaluationError, ValueError):
    pass


class NotVariational(Noether2Error):
    def __init__(self, variable, residual):
        self.variable = variable
        self.residual = residual
        super().__init__(f"Euler expression with respect to {variable!r} does not vanish: {residual}")


class NonlinearCharacteristic(Noether2Error):
    pass


class ResidualNonzero(Noether2Error):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class ConstraintViolated(Noether2Error):
    pass


class ParseError(Noether2Error):
    def __init__(self, message, line=0, column=0, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(sorted(set(expected)))
        where = f"line {line}, column {column}"
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(f"{where}: {message}")


class UndeclaredIdentifier(ParseError):
    pass


class ConstraintNotLinear(ParseError):
    pass


class GoldenMismatch(Noether2Error):
    def __init__(self, what, expected, actual):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"golden mismatch in {what}: expected {expected}, got {actual}")
