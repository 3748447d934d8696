from dataclasses import dataclass


class DomainError(ValueError):
    """Input outside the region where a formula is defined."""


class ConfigurationError(ValueError):
    """Malformed or inconsistent configuration."""


class ConvergenceError(RuntimeError):
    def __init__(self, operation: str, message: str):
        super().__init__(message)
        self.operation = operation

    def __str__(self) -> str:
        return f"{self.operation}: {self.args[0]}"


class ConsistencyError(RuntimeError):
    def __init__(self, operation: str, message: str):
        super().__init__(message)
        self.operation = operation

    def __str__(self) -> str:
        return f"{self.operation}: {self.args[0]}"


@dataclass(frozen=True)
class SeriesResult:
    value: float
    form: str
    terms: int
