"""Parametrised enumeration toolkit.

Stepped enumerators with tick-level cost accounting, the priority-queue
delay regularizer, AnotherSol/enumeration reductions, a small problem
suite with brute-force oracles, and delay-trace instrumentation.
"""

from penum.core import (
    DEFAULT_COST_CAP,
    DelayTrace,
    Emitted,
    Finished,
    Instance,
    ProblemDescriptor,
    SteppedEnumerator,
    Verdict,
    brute_force_enum,
    run_to_completion,
    verify_solutions,
)
from penum.errors import (
    BoundViolation,
    BudgetExhausted,
    CostAccountingViolation,
    DuplicateEmission,
    EnumerationError,
    OracleContractViolation,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_COST_CAP",
    "BoundViolation",
    "BudgetExhausted",
    "CostAccountingViolation",
    "DelayTrace",
    "DuplicateEmission",
    "Emitted",
    "EnumerationError",
    "Finished",
    "Instance",
    "OracleContractViolation",
    "ProblemDescriptor",
    "SteppedEnumerator",
    "Verdict",
    "brute_force_enum",
    "run_to_completion",
    "verify_solutions",
]
