"""Exception types shared across the toolkit."""
from __future__ import annotations


class RepairLabError(Exception):
    """Base class for all toolkit errors."""


class ParseError(RepairLabError):
    """A serialized record or script could not be parsed.

    ``field_path`` points at the offending field ("test_results[2].verdict"),
    ``line`` at the offending source line when the input is line-oriented.
    """

    def __init__(self, message: str, field_path: str | None = None, line: int | None = None):
        self.field_path = field_path
        self.line = line
        prefix = ""
        if field_path:
            prefix = f"{field_path}: "
        elif line is not None:
            prefix = f"line {line}: "
        super().__init__(prefix + message)


class InvariantViolation(RepairLabError):
    """A structurally valid record breaks a documented invariant."""

    def __init__(self, invariant: str, message: str):
        self.invariant = invariant
        super().__init__(f"[{invariant}] {message}")


class ContractError(RepairLabError):
    """An operation was invoked outside its declared precondition."""


class ConfigError(RepairLabError):
    """A configuration value is missing, malformed, or out of range."""
