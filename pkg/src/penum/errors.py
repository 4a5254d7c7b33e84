"""Exception hierarchy shared by every module."""

from __future__ import annotations


class EnumerationError(Exception):
    """Base class for contract violations raised while enumerating."""


class DuplicateEmission(EnumerationError):
    def __init__(self, solution: bytes):
        super().__init__(f"solution emitted twice: {solution!r}")
        self.solution = solution


class CostAccountingViolation(EnumerationError):
    pass


class BudgetExhausted(EnumerationError):
    def __init__(self, cap: int, what: str = "run"):
        super().__init__(f"{what} exceeded the global cost cap of {cap} ticks")
        self.cap = cap


class EnumeratorPoisoned(EnumerationError):
    """Raised when advancing an enumerator that already failed."""


class BoundViolation(EnumerationError):
    """A declared cost bound turned out to be false for this instance.

    ``index`` is the solution index i whose threshold was reached with
    fewer than i solutions produced.
    """

    def __init__(self, index: int, detail: str = ""):
        msg = f"declared bound violated at solution index {index}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.index = index


class OracleContractViolation(EnumerationError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class NotHorn(ValueError):
    def __init__(self, clause_index: int, clause):
        super().__init__(
            f"clause {clause_index} has more than one positive literal: {list(clause)}"
        )
        self.clause_index = clause_index


class InsufficientData(ValueError):
    pass


class DegenerateTrace(ValueError):
    def __init__(self, zero_indices):
        super().__init__(f"zero delays inside the fit window at indices {list(zero_indices)}")
        self.zero_indices = list(zero_indices)


class NoSamples(ValueError):
    pass
