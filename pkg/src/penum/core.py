"""Enumeration problems, stepped enumerators and delay traces.

A *process* is a generator that yields either a positive ``int`` (work
ticks it has just spent) or ``bytes`` (a solution it outputs at the current
cost).  :class:`SteppedEnumerator` drives such a process under explicit tick
budgets, which is the execution contract every simulation in this package
relies on.  Returning from the generator means the algorithm halted.
"""

from __future__ import annotations

import csv
import io
import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

from penum.errors import (
    BudgetExhausted,
    CostAccountingViolation,
    DuplicateEmission,
    EnumeratorPoisoned,
)

DEFAULT_COST_CAP = 10**8

Solution = bytes
Process = Iterator[Union[int, bytes]]


def poly(coeffs: Sequence[int], n: int) -> int:
    """Evaluate a polynomial given by ascending coefficients (c0 + c1*n + ...)."""
    value = 0
    for c in reversed(coeffs):
        value = value * n + c
    return value


def ipow(base: int, exponent: int) -> int:
    # Python already treats 0 ** 0 as 1, which is the convention used throughout.
    return base**exponent


@dataclass(frozen=True)
class ProblemDescriptor:
    """A parametrised enumeration problem.

    ``check(x, y)`` decides membership of ``y`` in Sol(x), ``length_bound``
    holds ascending coefficients of the polynomial bounding solution length,
    and ``parametrisation`` maps raw instance bytes to a natural number.

    ``candidates`` optionally yields a finite superset of Sol(x) in canonical
    encoding.  Without it, brute force falls back to every string over
    ``alphabet`` of length at most p(|x|).
    """

    name: str
    check: Callable[[bytes, bytes], bool]
    length_bound: tuple[int, ...]
    parametrisation: Callable[[bytes], int]
    alphabet: bytes = b"01"
    candidates: Callable[[bytes], Iterable[bytes]] | None = None

    def max_length(self, n: int) -> int:
        return poly(self.length_bound, n)


@dataclass(frozen=True)
class Instance:
    problem: ProblemDescriptor
    raw: bytes
    param: int

    def __post_init__(self):
        expected = self.problem.parametrisation(self.raw)
        if self.param != expected:
            raise ValueError(
                f"cached parameter {self.param} != kappa(x) = {expected} for {self.problem.name}"
            )

    @classmethod
    def of(cls, problem: ProblemDescriptor, raw: bytes) -> "Instance":
        return cls(problem, raw, problem.parametrisation(raw))

    @property
    def size(self) -> int:
        return len(self.raw)


@dataclass(frozen=True)
class Emitted:
    solution: bytes
    at_cost: int


@dataclass(frozen=True)
class Finished:
    at_cost: int


Event = Union[Emitted, Finished]


class SteppedEnumerator:
    """Resumable enumeration process advanced by tick budgets.

    Not thread-safe: advance one instance from a single thread only.
    """

    def __init__(self, process: Process, name: str = ""):
        self._process = process
        self.name = name
        self.cost_consumed = 0
        self.finished = False
        self.emitted: set[bytes] = set()
        self.emission_count = 0
        self._debt = 0
        self._ticked_since_emit = False
        self._poisoned: BaseException | None = None

    def advance(self, budget: int) -> list[Event]:
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        if self._poisoned is not None:
            raise EnumeratorPoisoned(f"enumerator {self.name!r} failed earlier") from self._poisoned
        if self.finished:
            return []
        try:
            return self._advance(budget)
        except Exception as exc:
            self._poisoned = exc
            raise

    def _advance(self, budget: int) -> list[Event]:
        events: list[Event] = []
        remaining = budget
        while True:
            if self._debt:
                if not remaining:
                    break
                take = min(self._debt, remaining)
                self._debt -= take
                remaining -= take
                self.cost_consumed += take
                self._ticked_since_emit = True
                continue
            try:
                item = next(self._process)
            except StopIteration:
                self.finished = True
                events.append(Finished(self.cost_consumed))
                break
            if isinstance(item, bytes):
                if not self._ticked_since_emit:
                    raise CostAccountingViolation(
                        f"emission of {item!r} at cost {self.cost_consumed} without spending a tick"
                    )
                if item in self.emitted:
                    raise DuplicateEmission(item)
                self.emitted.add(item)
                self.emission_count += 1
                self._ticked_since_emit = False
                events.append(Emitted(item, self.cost_consumed))
            elif isinstance(item, int) and not isinstance(item, bool):
                if item < 1:
                    raise CostAccountingViolation(f"process reported {item} ticks while running")
                self._debt = item
            else:
                raise TypeError(f"process yielded {type(item).__name__}, expected int or bytes")
        return events


@dataclass
class DelayTrace:
    """Delays d_0..d_n of a completed run, in ticks.

    d_0 is precomputation, d_n postcomputation; a run without solutions
    has the single delay [d_0].
    """

    delays: list[int]
    emit_costs: list[int]
    total_cost: int
    wall_seconds: float | None = field(default=None, compare=False)

    @classmethod
    def from_events(cls, emit_costs: Sequence[int], finish_cost: int) -> "DelayTrace":
        emit_costs = list(emit_costs)
        marks = [0, *emit_costs, finish_cost]
        delays = [b - a for a, b in zip(marks, marks[1:])]
        if any(d < 0 for d in delays):
            raise ValueError("emission costs must be nondecreasing and end before the finish")
        return cls(delays, emit_costs, finish_cost)

    @classmethod
    def from_delays(cls, delays: Sequence[int]) -> "DelayTrace":
        delays = list(delays)
        cum = list(itertools.accumulate(delays))
        return cls(delays, cum[:-1], cum[-1] if cum else 0)

    @property
    def n(self) -> int:
        return len(self.emit_costs)

    def cumulative(self) -> list[int]:
        return list(itertools.accumulate(self.delays))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "delay", "cum_cost"])
        for i, (d, c) in enumerate(zip(self.delays, self.cumulative())):
            writer.writerow([i, d, c])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DelayTrace":
        rows = list(csv.DictReader(io.StringIO(text)))
        if rows and set(rows[0]) != {"i", "delay", "cum_cost"}:
            raise ValueError("trace CSV must have header i,delay,cum_cost")
        delays = [int(r["delay"]) for r in rows]
        for expected, r in enumerate(rows):
            if int(r["i"]) != expected:
                raise ValueError(f"trace CSV row {expected} has index {r['i']}")
        return cls.from_delays(delays)


def run_to_completion(
    enumerator: SteppedEnumerator, cost_cap: int = DEFAULT_COST_CAP
) -> tuple[list[bytes], DelayTrace]:
    if enumerator.cost_consumed or enumerator.finished:
        raise ValueError("run_to_completion needs a freshly constructed enumerator")
    started = time.perf_counter()
    events = enumerator.advance(cost_cap)
    if not enumerator.finished:
        raise BudgetExhausted(cost_cap, what=enumerator.name or "enumeration")
    solutions = [e.solution for e in events if isinstance(e, Emitted)]
    emit_costs = [e.at_cost for e in events if isinstance(e, Emitted)]
    trace = DelayTrace.from_events(emit_costs, enumerator.cost_consumed)
    trace.wall_seconds = time.perf_counter() - started
    return solutions, trace


@dataclass(frozen=True)
class Verdict:
    ok: bool
    index: int | None = None
    reason: str | None = None

    def __bool__(self):
        return self.ok


PASS = Verdict(True)


def verify_solutions(problem: ProblemDescriptor, x: Instance, solutions: Iterable[bytes]) -> Verdict:
    limit = problem.max_length(x.size)
    seen: set[bytes] = set()
    for i, y in enumerate(solutions):
        if y in seen:
            return Verdict(False, i, "duplicate")
        seen.add(y)
        if len(y) > limit:
            return Verdict(False, i, "too-long")
        if not problem.check(x.raw, y):
            return Verdict(False, i, "not-a-solution")
    return PASS


def _all_strings(alphabet: bytes, max_len: int) -> Iterator[bytes]:
    symbols = [bytes([c]) for c in sorted(set(alphabet))]
    for length in range(max_len + 1):
        for combo in itertools.product(symbols, repeat=length):
            yield b"".join(combo)


def brute_force_enum(
    problem: ProblemDescriptor, x: Instance, cost_cap: int = DEFAULT_COST_CAP
) -> frozenset[bytes]:
    """Ground truth: test every candidate string and keep the solutions.

    One tick per candidate; raises BudgetExhausted when the candidate space
    does not fit in ``cost_cap``.
    """
    limit = problem.max_length(x.size)
    if problem.candidates is not None:
        universe = problem.candidates(x.raw)
    else:
        alphabet_size = len(set(problem.alphabet))
        space = sum(alphabet_size**length for length in range(limit + 1))
        if space > cost_cap:
            raise BudgetExhausted(cost_cap, what=f"brute force over {space} candidates")
        universe = _all_strings(problem.alphabet, limit)
    found = set()
    ticks = 0
    for y in universe:
        ticks += 1
        if ticks > cost_cap:
            raise BudgetExhausted(cost_cap, what="brute force")
        if len(y) <= limit and problem.check(x.raw, y):
            found.add(y)
    return frozenset(found)


def _escape(y: bytes) -> str:
    out = []
    for c in y:
        if 0x20 <= c < 0x7F and c != 0x5C:
            out.append(chr(c))
        else:
            out.append(f"\\x{c:02x}")
    return "".join(out)


def _unescape(line: str) -> bytes:
    out = bytearray()
    i = 0
    while i < len(line):
        if line[i] == "\\":
            if line[i + 1] != "x":
                raise ValueError(f"bad escape in solution line: {line!r}")
            out.append(int(line[i + 2 : i + 4], 16))
            i += 4
        else:
            out.append(ord(line[i]))
            i += 1
    return bytes(out)


def format_solutions(solutions: Iterable[bytes]) -> str:
    return "".join(_escape(y) + "\n" for y in solutions)


def parse_solutions(text: str) -> list[bytes]:
    if not text:
        return []
    if not text.endswith("\n"):
        text += "\n"
    return [_unescape(line) for line in text[:-1].split("\n")]
