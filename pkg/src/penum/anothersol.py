"""Reductions between the AnotherSol search problem and enumeration.

``enum_from_oracle`` builds an enumerator from a solver for "give me a
solution outside S, or say S already covers Sol(x)"; ``oracle_from_enum``
goes the other way by simulating a fresh enumerator under its declared
capped bound.  ``completeness_check`` is the bounded-simulation test used
to verify the answer "S covers Sol(x)".
"""

from __future__ import annotations

import bisect
import enum
import hashlib
import json
from dataclasses import dataclass
from typing import AbstractSet, Callable, Iterable

from penum.core import (
    DEFAULT_COST_CAP,
    Emitted,
    Instance,
    ProblemDescriptor,
    SteppedEnumerator,
    Verdict,
    brute_force_enum,
    ipow,
    run_to_completion,
)
from penum.errors import BoundViolation, OracleContractViolation
from penum.regularize import BudgetSchedule


class _Exhausted(enum.Enum):
    EXHAUSTED = "#"

    def __repr__(self):
        return "EXHAUSTED"


EXHAUSTED = _Exhausted.EXHAUSTED
"""Answer meaning S already contains every solution."""

EnumFactory = Callable[[Instance], SteppedEnumerator]


class EnumeratorBoundDecl(BudgetSchedule):
    """Declared capped bound: i solutions within t(k) * i**a * p(n) ticks."""

    def budget(self, k: int, n: int, known: int) -> int:
        """Simulation budget for an oracle call with ``known`` = |S|."""
        return self.scale(k, n) * ipow(known + 1, self.exponent)


class AnotherSolOracle:
    """Solver for AnotherSol; ``cost_of_call`` is read after every ``solve``."""

    cost_of_call: int = 1

    def solve(self, x: Instance, known: AbstractSet[bytes]):
        raise NotImplementedError


class FunctionOracle(AnotherSolOracle):
    def __init__(self, fn: Callable[[Instance, AbstractSet[bytes]], object], cost: int = 1):
        self.fn = fn
        self.cost_of_call = cost

    def solve(self, x, known):
        return self.fn(x, known)


class BruteForceOracle(AnotherSolOracle):
    """Answers with the byte-least element of brute_force_enum(x) minus S."""

    def __init__(self, cost_cap: int = DEFAULT_COST_CAP):
        self.cost_cap = cost_cap
        self._cache: dict[bytes, list[bytes]] = {}

    def solve(self, x, known):
        sols = self._cache.get(x.raw)
        if sols is None:
            sols = self._cache[x.raw] = sorted(brute_force_enum(x.problem, x, self.cost_cap))
        self.cost_of_call = len(sols) + 1
        return next((y for y in sols if y not in known), EXHAUSTED)


def _enum_from_oracle_process(oracle: AnotherSolOracle, x: Instance, check: bool):
    known: set[bytes] = set()
    while True:
        y = oracle.solve(x, frozenset(known))
        yield max(1, int(oracle.cost_of_call))
        if y is EXHAUSTED:
            return
        if not isinstance(y, bytes):
            raise OracleContractViolation(f"oracle returned {y!r}, expected bytes or EXHAUSTED")
        if y in known:
            raise OracleContractViolation(f"oracle returned {y!r}, which is already in S")
        if check and not x.problem.check(x.raw, y):
            raise OracleContractViolation(f"oracle returned non-solution {y!r}")
        known.add(y)
        yield 1  # set insertion
        yield y


def enum_from_oracle(oracle: AnotherSolOracle, x: Instance, *, check: bool = True) -> SteppedEnumerator:
    """S <- {}; repeat y <- oracle(x, S); S <- S + {y}; print y until exhausted."""
    return SteppedEnumerator(_enum_from_oracle_process(oracle, x, check), name="enum_from_oracle")


class ReplayLog:
    """Event log of one run, answering "what would a fresh run do in B ticks".

    Enumerators are deterministic, so a fresh run under budget B emits exactly
    the prefix of the full run's emissions with cost <= B and is finished iff
    the full run finished by B.  The log is extended lazily.
    """

    def __init__(self, make_enum: EnumFactory, x: Instance):
        self._enum = make_enum(x)
        self.solutions: list[bytes] = []
        self.costs: list[int] = []
        self.finish_cost: int | None = None

    def simulate(self, budget: int) -> tuple[list[bytes], bool, int]:
        if self.finish_cost is None and budget > self._enum.cost_consumed:
            for ev in self._enum.advance(budget - self._enum.cost_consumed):
                if isinstance(ev, Emitted):
                    self.solutions.append(ev.solution)
                    self.costs.append(ev.at_cost)
                else:
                    self.finish_cost = ev.at_cost
        if self.finish_cost is not None and self.finish_cost <= budget:
            return list(self.solutions), True, self.finish_cost
        cut = bisect.bisect_right(self.costs, budget)
        return self.solutions[:cut], False, budget


def _simulate_fresh(make_enum: EnumFactory, x: Instance, budget: int) -> tuple[list[bytes], bool, int]:
    en = make_enum(x)
    events = en.advance(budget) if budget >= 1 else []
    sols = [ev.solution for ev in events if isinstance(ev, Emitted)]
    return sols, en.finished, en.cost_consumed


def _bounded_answer(make_enum, bound, x, known, replay):
    budget = bound.budget(x.param, x.size, len(known))
    if replay is not None:
        sols, finished, ticks = replay.simulate(budget)
    else:
        sols, finished, ticks = _simulate_fresh(make_enum, x, budget)
    if not finished and len(sols) <= len(known):
        raise BoundViolation(
            len(known) + 1,
            f"only {len(sols)} solutions within {budget} ticks and the enumerator has not halted",
        )
    fresh = [y for y in sols if y not in known]
    return (min(fresh) if fresh else EXHAUSTED), ticks


def oracle_from_enum(
    make_enum: EnumFactory,
    bound: EnumeratorBoundDecl,
    x: Instance,
    known: AbstractSet[bytes],
    *,
    replay: ReplayLog | None = None,
):
    """Answer AnotherSol(x, S) by simulating an enumerator for t(k)*(|S|+1)**a*p(n) ticks.

    If the simulation halts, its output is all of Sol(x): return the
    byte-least solution outside S, or EXHAUSTED.  If it does not halt it has
    output more than |S| solutions, so one of them lies outside S.
    """
    return _bounded_answer(make_enum, bound, x, known, replay)[0]


class EnumeratorOracle(AnotherSolOracle):
    """AnotherSol solver backed by bounded simulation of a fresh enumerator."""

    def __init__(self, make_enum: EnumFactory, bound: EnumeratorBoundDecl, *, replay: bool = False):
        self.make_enum = make_enum
        self.bound = bound
        self.replay = replay
        self.calls = 0
        self.ticks_total = 0
        self._logs: dict[bytes, ReplayLog] = {}

    def solve(self, x, known):
        log = None
        if self.replay:
            log = self._logs.get(x.raw)
            if log is None:
                log = self._logs[x.raw] = ReplayLog(self.make_enum, x)
        answer, ticks = _bounded_answer(self.make_enum, self.bound, x, known, log)
        self.calls += 1
        self.ticks_total += ticks
        self.cost_of_call = ticks + 1
        return answer


def completeness_check(
    make_enum: EnumFactory, bound: EnumeratorBoundDecl, x: Instance, known: AbstractSet[bytes]
) -> bool:
    """True iff S contains Sol(x), given an enumerator finishing within t(k)*p(n)*(|Sol|+1)**a.

    Not finishing within the budget for |S| proves |Sol(x)| > |S|.
    """
    budget = bound.budget(x.param, x.size, len(known))
    sols, finished, _ = _simulate_fresh(make_enum, x, budget)
    if not finished:
        return False
    return set(sols) <= set(known)


@dataclass
class RoundtripResult:
    instance: str
    passed: bool
    solutions: list[bytes]
    oracle_calls: int
    ticks_total: int
    reason: str | None = None

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "pass": self.passed,
            "solutions_count": len(self.solutions),
            "oracle_calls": self.oracle_calls,
            "ticks_total": self.ticks_total,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def roundtrip(
    problem: ProblemDescriptor,
    x: Instance,
    bound: EnumeratorBoundDecl,
    make_enum: EnumFactory,
    *,
    replay: bool = False,
    cost_cap: int = DEFAULT_COST_CAP,
) -> RoundtripResult:
    """enum_from_oracle over an enumerator-backed oracle, compared with brute force."""
    oracle = EnumeratorOracle(make_enum, bound, replay=replay)
    en = enum_from_oracle(oracle, x)
    sols, trace = run_to_completion(en, cost_cap)
    truth = brute_force_enum(problem, x, cost_cap)
    digest = hashlib.sha256(x.raw).hexdigest()[:16]
    passed = len(sols) == len(truth) and set(sols) == truth
    reason = None if passed else f"{len(set(sols) ^ truth)} solutions differ from brute force"
    return RoundtripResult(digest, passed, sols, oracle.calls, trace.total_cost, reason)


def completeness_verdicts(
    make_enum: EnumFactory,
    bound: EnumeratorBoundDecl,
    x: Instance,
    candidates: Iterable[AbstractSet[bytes]],
    truth: AbstractSet[bytes],
) -> Verdict:
    """Compare completeness_check with set inclusion over several S."""
    for i, known in enumerate(candidates):
        if completeness_check(make_enum, bound, x, known) != (set(truth) <= set(known)):
            return Verdict(False, i, "completeness mismatch")
    return Verdict(True)
