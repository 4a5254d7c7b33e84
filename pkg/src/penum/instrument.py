"""Delay-trace measurement: power-law fits, bound checks, queue memory, reports.

A finite trace can only falsify a bound.  Reports therefore say a run is
"consistent with" a bound shape, never that a problem belongs to a class.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from penum.core import DelayTrace, ipow
from penum.errors import DegenerateTrace, InsufficientData, NoSamples
from penum.regularize import BudgetSchedule, RegularizedEnumerator, delay_allowance

SCHEMA_VERSION = "1"
MIN_FIT_POINTS = 8
# engineering choice, not derived from any bound
FIT_TOLERANCE = 0.3


@dataclass(frozen=True)
class FitResult:
    exponent_hat: float
    scale_hat: float
    r_squared: float
    index_range: tuple[int, int]
    points: int
    excluded_zero: int = 0

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["index_range"] = list(self.index_range)
        return doc


def default_window(n: int) -> tuple[int, int]:
    return max(MIN_FIT_POINTS, n // 100), n


def fit_exponent(
    trace: DelayTrace | Sequence[float],
    i_min: int | None = None,
    i_max: int | None = None,
    *,
    exclude_zeros: bool = True,
) -> FitResult:
    """Least-squares fit of log d_i = log(scale) + a * log(i) over [i_min, i_max].

    Zero delays cannot be logged; by default they are dropped and counted in
    ``excluded_zero``.  With ``exclude_zeros=False`` they raise DegenerateTrace.
    """
    delays = trace.delays if isinstance(trace, DelayTrace) else list(trace)
    if i_min is None or i_max is None:
        lo, hi = default_window(len(delays) - 1)
        i_min = lo if i_min is None else i_min
        i_max = hi if i_max is None else i_max
    i_min = max(i_min, 1)
    i_max = min(i_max, len(delays) - 1)
    window = range(i_min, i_max + 1)
    zeros = [i for i in window if delays[i] <= 0]
    if zeros and not exclude_zeros:
        raise DegenerateTrace(zeros)
    idx = np.array([i for i in window if delays[i] > 0], dtype=float)
    if idx.size < MIN_FIT_POINTS:
        raise InsufficientData(
            f"need {MIN_FIT_POINTS} positive delays in [{i_min}, {i_max}], have {idx.size}"
        )
    vals = np.array([delays[int(i)] for i in idx], dtype=float)
    x = np.log(idx)
    y = np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return FitResult(float(slope), float(np.exp(intercept)), r2, (i_min, i_max), int(idx.size), len(zeros))


@dataclass(frozen=True)
class BoundReport:
    kind: str  # "Delay" or "CapTotal"
    a: int
    scale: int
    passed: bool
    first_violation: int | None
    max_ratio: float

    @property
    def label(self) -> str:
        return f"{self.kind}({self.a})"

    def to_json(self) -> dict:
        return {
            "bound_kind": self.label,
            "scale": self.scale,
            "pass": self.passed,
            "first_violation": self.first_violation,
            "max_ratio": self.max_ratio,
            "verdict": ("consistent with " if self.passed else "violates ") + self.label,
        }


def _report(kind: str, a: int, scale: int, pairs: Iterable[tuple[int, int, int]]) -> BoundReport:
    first = None
    worst = Fraction(0)
    for i, value, bound in pairs:
        if value > bound and first is None:
            first = i
        if bound == 0:
            ratio = Fraction(0) if value == 0 else None
        else:
            ratio = Fraction(value, bound)
        if ratio is None:
            worst = None
        elif worst is not None:
            worst = max(worst, ratio)
    return BoundReport(kind, a, scale, first is None, first, float("inf") if worst is None else float(worst))


def check_delay_bound(trace: DelayTrace, t_k: int, p_n: int, a: int) -> BoundReport:
    """d_i <= t*p*i**a for 1 <= i <= n, and d_0 <= t*p (0**0 = 1)."""
    scale = t_k * p_n
    pairs = ((i, d, delay_allowance(scale, a, i)) for i, d in enumerate(trace.delays))
    return _report("Delay", a, scale, pairs)


def check_cap_bound(trace: DelayTrace, t_k: int, p_n: int, a: int) -> BoundReport:
    """Cost at the i-th emission <= t*p*i**a for 1 <= i <= n."""
    scale = t_k * p_n
    pairs = ((i, c, scale * ipow(i, a)) for i, c in enumerate(trace.emit_costs, start=1))
    return _report("CapTotal", a, scale, pairs)


def check_schedule_bound(
    trace: DelayTrace, schedule: BudgetSchedule, k: int, n: int, extra: int = 0
) -> BoundReport:
    """d_i <= B(i+1) - B(i) + extra for every i: the regularized-delay guarantee."""
    b = lambda i: schedule.bound(k, n, i)  # noqa: E731
    pairs = ((i, d, b(i + 1) - b(i) + extra) for i, d in enumerate(trace.delays))
    return _report("Delay", max(schedule.exponent - 1, 0), schedule.scale(k, n), pairs)


@dataclass(frozen=True)
class MemoryProfile:
    max_queue: int
    samples: list[int]
    peak_queue: int = 0

    def to_json(self) -> dict:
        return {"max_queue": self.max_queue, "peak_queue": self.peak_queue, "samples": len(self.samples)}


def memory_profile(run: RegularizedEnumerator) -> MemoryProfile:
    """Queue size sampled at each regularized emission (before extraction)."""
    samples = run.state.queue_samples
    if samples is None:
        raise NoSamples("regularizer was built with sample=False")
    return MemoryProfile(max(samples, default=0), list(samples), run.state.max_queue)


@dataclass
class RunRecord:
    problem: str
    instance_raw: bytes
    n: int
    k: int
    solutions_count: int
    trace_csv_path: str | None = None
    fits: list[FitResult] = field(default_factory=list)
    bounds: list[BoundReport] = field(default_factory=list)
    memory: MemoryProfile | None = None

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.bounds)

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "instance_digest": hashlib.sha256(self.instance_raw).hexdigest(),
            "n": self.n,
            "k": self.k,
            "solutions_count": self.solutions_count,
            "trace_csv_path": self.trace_csv_path,
            "fits": [f.to_json() for f in self.fits],
            "bounds": [b.to_json() for b in self.bounds],
            "memory": self.memory.to_json() if self.memory else {},
            "pass": self.passed,
        }


def report(*runs: RunRecord | dict) -> dict:
    entries = [r.to_json() if isinstance(r, RunRecord) else r for r in runs]
    return {
        "schema_version": SCHEMA_VERSION,
        "runs": entries,
        "overall_pass": all(e.get("pass", True) for e in entries),
        "notes": [
            "bound checks can only falsify; passing means consistent with the bound",
            f"fit windows and the +/-{FIT_TOLERANCE} exponent tolerance are engineering choices",
        ],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
