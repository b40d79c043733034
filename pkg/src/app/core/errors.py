from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from app.core.validation import ParamViolation


class GameModelError(Exception):
    pass


class ParameterValidationError(GameModelError):
    def __init__(self, violations: Sequence[ParamViolation]) -> None:
        self.violations = tuple(violations)
        summary = "; ".join(violation.message for violation in self.violations)
        super().__init__(f"Invalid parameters: {summary}")


class NonFiniteStateError(GameModelError):
    pass


class ComparisonDegenerateError(GameModelError):
    pass


class UsageError(GameModelError):
    pass


class ConfigError(GameModelError):
    pass


class ConfigParseError(ConfigError):
    def __init__(self, path: str, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")


class UnknownKeyError(ConfigError):
    def __init__(self, key_path: str) -> None:
        self.key_path = key_path
        super().__init__(f"Unknown configuration key: {key_path}")


class ConfigValidationError(ConfigError):
    def __init__(self, violations: Sequence[ParamViolation]) -> None:
        self.violations = tuple(violations)
        summary = "; ".join(violation.message for violation in self.violations)
        super().__init__(f"Configuration failed validation: {summary}")
