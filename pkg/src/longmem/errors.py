"""Exception types shared across the package."""


class LongMemoryError(Exception):
    """Base class for package errors."""


class ValidationError(LongMemoryError, ValueError):
    """A parameter vector or model falls outside the admissible region."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ContractError(LongMemoryError, ValueError):
    """An input violates a documented precondition."""


class NumericalError(LongMemoryError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""


class ModelError(LongMemoryError):
    """The model violates a standing assumption (e.g. singular information)."""
