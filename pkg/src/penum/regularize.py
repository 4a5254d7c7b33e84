"""Priority-queue delay regularizer and capped/structured bound arithmetic.

:func:`cap_to_inc` turns an enumerator whose first i outputs arrive within
t(k)*p(n)*i**(a+1) ticks into one whose i-th delay is bounded by the
schedule difference B(i+1) - B(i), buffering solutions in a min-heap.
:func:`inc_to_cap_bound` checks the converse arithmetic on a trace.
"""

from __future__ import annotations

import ast
import heapq
import json
import operator
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from penum.core import (
    DelayTrace,
    Emitted,
    Finished,
    SteppedEnumerator,
    Verdict,
    ipow,
    poly,
    run_to_completion,
)
from penum.errors import BoundViolation

# ticks charged for extracting one solution from the queue and writing it
EMIT_TICKS = 1

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Pow: operator.pow,
    ast.FloorDiv: operator.floordiv,
    ast.Mod: operator.mod,
}


def _eval_formula(node: ast.AST, k: int) -> int:
    if isinstance(node, ast.Expression):
        return _eval_formula(node.body, k)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.Name) and node.id == "k":
        return k
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_formula(node.left, k), _eval_formula(node.right, k))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "factorial":
        (arg,) = node.args
        value = 1
        for j in range(2, _eval_formula(arg, k) + 1):
            value *= j
        return value
    raise ValueError(f"unsupported construct in t formula: {ast.dump(node)}")


def formula(text: str) -> Callable[[int], int]:
    """Compile an integer expression in ``k`` such as ``"2**k + 3"``."""
    tree = ast.parse(text, mode="eval")
    _eval_formula(tree, 1)  # reject bad syntax eagerly
    fn = lambda k: _eval_formula(tree, k)  # noqa: E731
    fn.source = text
    return fn


@dataclass
class BudgetSchedule:
    """B(k, n, i) = t(k) * p(n) * i**exponent, with 0**0 = 1.

    ``t`` is an int, a table ``{k: value}``, or a callable of k.
    """

    t: int | Mapping[int, int] | Callable[[int], int]
    p_coeffs: tuple[int, ...] = (1,)
    exponent: int = 1

    def __post_init__(self):
        self.p_coeffs = tuple(self.p_coeffs)
        if self.exponent < 0:
            raise ValueError("exponent must be a natural number")

    def t_of_k(self, k: int) -> int:
        if isinstance(self.t, int):
            return self.t
        if isinstance(self.t, Mapping):
            try:
                return self.t[k]
            except KeyError:
                raise ValueError(f"t table has no entry for k={k}") from None
        return int(self.t(k))

    def p(self, n: int) -> int:
        return poly(self.p_coeffs, n)

    def scale(self, k: int, n: int) -> int:
        return self.t_of_k(k) * self.p(n)

    def bound(self, k: int, n: int, i: int) -> int:
        return self.scale(k, n) * ipow(i, self.exponent)

    def to_json(self) -> dict:
        doc: dict = {"p_coeffs": list(self.p_coeffs), "exponent": self.exponent}
        if isinstance(self.t, int):
            doc["t_table"] = {"*": self.t}
        elif isinstance(self.t, Mapping):
            doc["t_table"] = {str(k): v for k, v in sorted(self.t.items())}
        elif hasattr(self.t, "source"):
            doc["t_formula"] = self.t.source
        else:
            raise ValueError("closure-valued t cannot be serialised; use a table or formula")
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "BudgetSchedule":
        if "t_formula" in doc:
            t = formula(doc["t_formula"])
        elif "t_table" in doc:
            table = doc["t_table"]
            if set(table) == {"*"}:
                t = int(table["*"])
            else:
                t = {int(k): int(v) for k, v in table.items()}
        elif "t_const" in doc:
            t = int(doc["t_const"])
        else:
            raise ValueError("schedule needs one of t_table, t_formula, t_const")
        return cls(t, tuple(int(c) for c in doc.get("p_coeffs", (1,))), int(doc.get("exponent", 1)))

    @classmethod
    def loads(cls, text: str) -> "BudgetSchedule":
        return cls.from_json(json.loads(text))


@dataclass
class RegularizerState:
    steps: int = 0
    solindex: int = 1
    queue: list[bytes] = field(default_factory=list)
    inner_finished: bool = False
    inner_emitted: int = 0
    emitted: int = 0
    max_queue: int = 0
    queue_samples: list[int] | None = field(default_factory=list)
    emission_steps: list[int] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)


class RegularizedEnumerator(SteppedEnumerator):
    """Re-emits an inner enumerator's solutions on the schedule B(1), B(2), ...

    The step counter tracks ticks of the inner enumerator.  Once it reaches
    B(solindex) the least queued solution (byte order) is written out.  When
    the inner enumerator halts the queue drains at one solution per tick.
    The outer cost is the inner ticks plus EMIT_TICKS per emission.
    """

    def __init__(
        self,
        inner: SteppedEnumerator,
        schedule: BudgetSchedule,
        k: int,
        n: int,
        *,
        allow_late: bool = False,
        sample: bool = True,
    ):
        self.inner = inner
        self.schedule = schedule
        self.k = k
        self.n = n
        self.allow_late = allow_late
        self.state = RegularizerState(queue_samples=[] if sample else None)
        super().__init__(self._run(), name=f"cap_to_inc({inner.name})")

    def threshold(self, i: int) -> int:
        return self.schedule.bound(self.k, self.n, i)

    def _absorb(self, events):
        st = self.state
        st.steps = self.inner.cost_consumed
        for ev in events:
            if isinstance(ev, Emitted):
                heapq.heappush(st.queue, ev.solution)
                st.inner_emitted += 1
                st.max_queue = max(st.max_queue, len(st.queue))
            elif isinstance(ev, Finished):
                st.inner_finished = True

    def _run(self):
        st = self.state
        while True:
            target = self.threshold(st.solindex)
            if not st.inner_finished and st.steps < target:
                before = st.steps
                self._absorb(self.inner.advance(target - st.steps))
                if st.steps > before:
                    yield st.steps - before
            if st.queue and (st.inner_finished or st.steps >= target):
                if st.queue_samples is not None:
                    st.queue_samples.append(len(st.queue))
                solution = heapq.heappop(st.queue)
                st.emission_steps.append(st.steps)
                st.solindex += 1
                st.emitted += 1
                yield EMIT_TICKS
                yield solution
                continue
            if st.inner_finished:
                return
            if st.steps >= target:
                # queue empty: the inner produced fewer than solindex solutions by B(solindex)
                if not self.allow_late:
                    raise BoundViolation(
                        st.solindex,
                        f"{st.inner_emitted} solutions after {st.steps} >= {target} inner ticks",
                    )
                st.violations.append(st.solindex)
                while not st.queue and not st.inner_finished:
                    before = st.steps
                    self._absorb(self.inner.advance(1))
                    if st.steps > before:
                        yield st.steps - before


def cap_to_inc(
    inner: SteppedEnumerator,
    schedule: BudgetSchedule,
    k: int,
    n: int,
    *,
    allow_late: bool = False,
    sample: bool = True,
) -> RegularizedEnumerator:
    if schedule.exponent < 1:
        raise ValueError("the capped schedule needs exponent a+1 >= 1")
    return RegularizedEnumerator(inner, schedule, k, n, allow_late=allow_late, sample=sample)


def calibrate_schedule(
    inner: SteppedEnumerator, k: int, n: int, exponent: int = 1, cost_cap: int = 10**8
) -> BudgetSchedule:
    """Smallest constant-scale schedule T * i**exponent a profiling run honours.

    Runs ``inner`` once and takes T = max(ceil(c_i / i**e), ceil(finish / (m+1)**e)),
    so every emission and the halt fit under the returned schedule.
    """
    if exponent < 1:
        raise ValueError("calibration needs exponent >= 1")
    _, trace = run_to_completion(inner, cost_cap)
    ceil_div = lambda a, b: -(-a // b)  # noqa: E731
    scale = max(
        [1, ceil_div(trace.total_cost, ipow(trace.n + 1, exponent))]
        + [ceil_div(c, ipow(i, exponent)) for i, c in enumerate(trace.emit_costs, start=1)]
    )
    return BudgetSchedule(scale, (1,), exponent)


def delay_allowance(scale: int, a: int, i: int) -> int:
    """Per-delay bound scale * i**a, with the 0-th delay allowed ``scale`` ticks."""
    return scale if i == 0 else scale * ipow(i, a)


def inc_to_cap_bound(trace: DelayTrace, schedule_a: BudgetSchedule, k: int, n: int) -> Verdict:
    """Check d_i <= t*p*i**a and sum_{j<=i} d_j <= 2*t*p*i**(a+1) for i >= 1.

    The premise is checked before the conclusion at each index, so the
    reported failure is the first one met scanning i upward.
    """
    scale = schedule_a.scale(k, n)
    a = schedule_a.exponent
    total = 0
    for i, d in enumerate(trace.delays):
        if d > delay_allowance(scale, a, i):
            return Verdict(False, i, "premise")
        total += d
        if i >= 1 and total > 2 * scale * ipow(i, a + 1):
            return Verdict(False, i, "conclusion")
    return Verdict(True)


def delay_slack(trace: DelayTrace, schedule: BudgetSchedule, k: int, n: int) -> list[int]:
    bound = lambda i: schedule.bound(k, n, i)  # noqa: E731
    return [bound(i + 1) - bound(i) - d for i, d in enumerate(trace.delays)]


def summation_chain_failure(a: int, i_max: int) -> int | None:
    """First i in [1, i_max] breaking sum_{k<=i} k**a <= (i+1)*i**a <= 2*i**(a+1).

    Exact integers, 0**0 = 1.  Returns None when the chain holds throughout.
    """
    total = ipow(0, a)
    for i in range(1, i_max + 1):
        total += ipow(i, a)
        middle = (i + 1) * ipow(i, a)
        if not (total <= middle <= 2 * ipow(i, a + 1)):
            return i
    return None


def queue_samples_csv(samples: Sequence[int]) -> str:
    lines = ["i,queue_size_at_emission"]
    lines += [f"{i},{q}" for i, q in enumerate(samples, start=1)]
    return "\n".join(lines) + "\n"
