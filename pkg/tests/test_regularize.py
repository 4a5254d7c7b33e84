from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from penum.core import DelayTrace, SteppedEnumerator, run_to_completion
from penum.errors import BoundViolation, DuplicateEmission
from penum.problems import SyntheticSpec, scripted_enum, synthetic_enum, synthetic_solution
from penum.regularize import (
    EMIT_TICKS,
    BudgetSchedule,
    calibrate_schedule,
    cap_to_inc,
    delay_slack,
    formula,
    inc_to_cap_bound,
    queue_samples_csv,
    summation_chain_failure,
)

SOLS = [synthetic_solution(i) for i in range(1, 6)]


def linear(scale, exponent=1):
    return BudgetSchedule(scale, (1,), exponent)


class TestScheduleArithmetic:
    def test_zero_power_convention(self):
        assert BudgetSchedule(3, (2,), 0).bound(0, 0, 0) == 6
        assert BudgetSchedule(3, (2,), 1).bound(0, 0, 0) == 0

    def test_nondecreasing(self):
        s = BudgetSchedule({0: 1, 1: 5}, (1, 1), 2)
        values = [s.bound(1, 3, i) for i in range(20)]
        assert values == sorted(values)
        assert values[2] == 5 * 4 * 4

    def test_formula_schedule(self):
        t = formula("2**(k+2) + factorial(k)")
        assert t(3) == 32 + 6
        with pytest.raises(ValueError):
            formula("__import__('os')")

    def test_json_roundtrip(self):
        for s in (linear(7, 2), BudgetSchedule({1: 3, 2: 9}, (1, 2), 1), BudgetSchedule(formula("k+1"), (2,), 3)):
            back = BudgetSchedule.from_json(json.loads(json.dumps(s.to_json())))
            assert [back.bound(2, 5, i) for i in range(6)] == [s.bound(2, 5, i) for i in range(6)]
        assert BudgetSchedule.loads('{"t_const": 4, "p_coeffs": [1], "exponent": 1}').bound(0, 0, 3) == 12

    def test_missing_table_entry(self):
        with pytest.raises(ValueError):
            BudgetSchedule({1: 2}).t_of_k(5)


class TestCapToInc:
    def test_early_finish_drains_queue(self):
        # inner halts at 30, before the first threshold 50: everything drains one per tick
        run = cap_to_inc(scripted_enum([10, 20, 30], 30), linear(50), 0, 0)
        sols, trace = run_to_completion(run)
        assert sols == SOLS[:3]
        assert trace.emit_costs == [31, 32, 33]
        assert run.state.emission_steps == [30, 30, 30]

    def test_regulated_emissions_at_thresholds(self):
        run = cap_to_inc(scripted_enum([10, 20, 30], 200), linear(50), 0, 0)
        sols, trace = run_to_completion(run)
        assert set(sols) == set(SOLS[:3])
        assert run.state.emission_steps == [50, 100, 150]
        assert trace.delays == [51, 51, 51, 50]
        assert delay_slack(trace, linear(50), 0, 0) == [-1, -1, -1, 0]

    def test_front_loaded_burst(self):
        run = cap_to_inc(scripted_enum([1, 2, 3, 4, 5], 3000), linear(100, 2), 0, 0)
        sols, trace = run_to_completion(run)
        assert run.state.emission_steps == [100, 400, 900, 1600, 2500]
        assert trace.emit_costs == [101, 402, 903, 1604, 2505]
        assert run.state.queue_samples == [5, 4, 3, 2, 1]
        assert run.state.max_queue == 5
        assert sols == SOLS

    def test_queue_order_is_bytewise(self):
        names = [b"zz", b"a", b"m"]
        run = cap_to_inc(scripted_enum([1, 2, 3], 300, names), linear(100), 0, 0)
        assert run_to_completion(run)[0] == [b"a", b"m", b"zz"]

    def test_empty_inner(self):
        sols, trace = run_to_completion(cap_to_inc(scripted_enum([], 7), linear(10), 0, 0))
        assert sols == [] and trace.delays == [7]

    def test_bound_violation(self):
        run = cap_to_inc(scripted_enum([100, 200], 200), linear(10), 0, 0)
        with pytest.raises(BoundViolation) as err:
            run_to_completion(run)
        assert err.value.index == 1

    def test_allow_late_continues(self):
        run = cap_to_inc(scripted_enum([100, 200], 200), linear(10), 0, 0, allow_late=True)
        sols, trace = run_to_completion(run)
        assert sols == SOLS[:2]
        assert run.state.violations == [1, 2]
        assert trace.emit_costs == [101, 202]

    def test_duplicate_from_inner_propagates(self):
        def proc():
            yield 1
            yield b"x"
            yield 1
            yield b"x"

        run = cap_to_inc(SteppedEnumerator(proc()), linear(10), 0, 0)
        with pytest.raises(DuplicateEmission):
            run_to_completion(run)

    def test_liar_synthetic_detected(self):
        # true exponent a+2 = 3 declared as a+1 = 2
        liar = SyntheticSpec(n=1, k=0, a=2, m=50, t=1)
        with pytest.raises(BoundViolation):
            run_to_completion(cap_to_inc(synthetic_enum(liar), linear(2, 2), 0, 1))

    def test_rejects_exponent_zero(self):
        with pytest.raises(ValueError):
            cap_to_inc(scripted_enum([1]), linear(1, 0), 0, 0)

    def test_unit_exponent_gives_constant_delay(self):
        # a = 0: an exponent-1 schedule yields delay t*p (+ emission tick), the DelayFPT shape
        spec = SyntheticSpec(n=1, k=0, a=0, m=40, t=9)
        run = cap_to_inc(synthetic_enum(spec), linear(spec.scale), 0, 1)
        _, trace = run_to_completion(run)
        assert set(trace.delays[:-1]) == {spec.scale + EMIT_TICKS}
        assert max(run.state.queue_samples) == 1


@st.composite
def capped_inner(draw):
    exponent = draw(st.integers(1, 3))
    scale = draw(st.integers(1, 40))
    m = draw(st.integers(0, 60))
    costs, last = [], 0
    for i in range(1, m + 1):
        hi = scale * i**exponent
        c = draw(st.integers(last + 1, hi))
        costs.append(c)
        last = c
    finish = last + draw(st.integers(0, scale))
    finish = min(finish, max(last, scale * (m + 1) ** exponent))
    return costs, finish, linear(scale, exponent)


@settings(max_examples=150, deadline=None)
@given(capped_inner())
def test_set_preservation_and_delay_bound(case):
    costs, finish, schedule = case
    inner_sols, _ = run_to_completion(scripted_enum(costs, finish))
    run = cap_to_inc(scripted_enum(costs, finish), schedule, 0, 0)
    sols, trace = run_to_completion(run)
    assert sorted(sols) == sorted(inner_sols)
    assert len(sols) == len(set(sols))
    assert all(s >= -EMIT_TICKS for s in delay_slack(trace, schedule, 0, 0))
    assert len(run.state.queue_samples) == len(sols)
    # queue accounting: size at each emission = inner emitted so far - re-emitted before it
    assert run.state.inner_emitted - run.state.emitted == len(run.state.queue) == 0


def test_queue_accounting_midrun():
    run = cap_to_inc(scripted_enum([1, 2, 3, 4, 5], 3000), linear(100, 2), 0, 0)
    run.advance(500)
    st_ = run.state
    assert len(st_.queue) == st_.inner_emitted - st_.emitted


@pytest.mark.parametrize(
    "delays, scale, a, expected",
    [
        ([0, 1, 2, 3], 1, 1, (True, None, None)),
        ([1, 1], 1, 0, (True, None, None)),
        ([0, 1, 2, 3, 4, 100], 1, 1, (False, 5, "premise")),
    ],
)
def test_inc_to_cap_bound(delays, scale, a, expected):
    v = inc_to_cap_bound(DelayTrace.from_delays(delays), linear(scale, a), 0, 0)
    assert (v.ok, v.index, v.reason) == expected


def test_inc_to_cap_bound_equality_case():
    # d_k = 1, a = 0, t*p = 1: sum_{k<=1} d_k = 2 = 2 * 1**1
    trace = DelayTrace.from_delays([1, 1])
    assert inc_to_cap_bound(trace, linear(1, 0), 0, 0).ok
    assert not inc_to_cap_bound(DelayTrace.from_delays([1, 2]), linear(1, 0), 0, 0).ok


def test_delay_slack_examples():
    assert delay_slack(DelayTrace([], [], 0), linear(50), 0, 0) == []
    trace = DelayTrace.from_delays([2 * i + 1 for i in range(10)])
    assert delay_slack(trace, linear(1, 2), 0, 0) == [0] * 10
    assert delay_slack(DelayTrace.from_delays([50, 50, 50, 0]), linear(50), 0, 0)[:3] == [0, 0, 0]


def test_summation_chain_small():
    for a in range(6):
        assert summation_chain_failure(a, 200) is None


def test_calibrated_schedule_is_honoured():
    spec = SyntheticSpec(n=3, k=1, a=1, m=30, t=2)
    schedule = calibrate_schedule(synthetic_enum(spec), 1, 3, exponent=2)
    sols, _ = run_to_completion(cap_to_inc(synthetic_enum(spec), schedule, 1, 3))
    assert len(sols) == 30


def test_queue_csv():
    assert queue_samples_csv([5, 4]) == "i,queue_size_at_emission\n1,5\n2,4\n"
