"""Exception types shared across the package."""


class MemsatError(Exception):
    """Base class for all package errors."""


class ContractError(MemsatError, ValueError):
    """An operation was called with arguments violating its precondition."""


class ConfigError(MemsatError, ValueError):
    """A configuration object violates its invariants."""


class DomainError(MemsatError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DimacsError(MemsatError, ValueError):
    """Malformed DIMACS CNF input.

    Carries the 1-based line number where the problem was detected.
    """

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
