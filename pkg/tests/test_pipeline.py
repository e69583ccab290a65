from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcover.errors import InfeasibleError, InstanceError, StageError
from capcover.generate import random_gsp
from capcover.gsp import (
    brute_force_gsp,
    check_feasible,
    exact_gsp_optimum,
    make_instance,
    verify_schedule,
)
from capcover.pipeline import (
    GUESS_FACTOR,
    exact_and_decimal,
    run_pipeline,
    solve_capcover,
)
from capcover.suites import two_point_instance

TWO_UNIT_JOBS = make_instance(1, [("j1", 1, [(0, 0), (2, 5)]), ("j2", 1, [(0, 0), (2, 1)])])


def test_two_unit_jobs():
    res = run_pipeline(TWO_UNIT_JOBS, oracle=True)
    led = res.ledger
    assert led.brute_force_opt == 1
    assert exact_gsp_optimum(TWO_UNIT_JOBS)[1] == 1
    assert led.ok
    assert not verify_schedule(res.schedule, TWO_UNIT_JOBS, led.deadlines)
    assert led.final_cost <= GUESS_FACTOR * led.gamma * 1


def test_all_zero_curves():
    inst = make_instance(2, [("a", 3, [(0, 0)]), ("b", 2, [(0, 0)]), ("c", 4, [(0, 0)])])
    res = run_pipeline(inst)
    assert res.ledger.final_cost == 0 and res.ledger.final_cost_original == 0
    assert check_feasible(res.ledger.deadlines, inst)
    assert res.ledger.ok


def test_fixed_guess_runs_once():
    res = run_pipeline(TWO_UNIT_JOBS, opt_guess=Fraction(3))
    assert res.ledger.guesses == [3]
    with pytest.raises(InstanceError):
        run_pipeline(TWO_UNIT_JOBS, opt_guess=0)


def test_bad_rounding_mode():
    with pytest.raises(InstanceError):
        run_pipeline(TWO_UNIT_JOBS, rounding="magic")


def test_stage_errors_are_tagged(monkeypatch):
    import capcover.pipeline as pl

    def boom(*args, **kwargs):
        raise InfeasibleError("no cover")

    monkeypatch.setattr(pl, "build_trc", boom)
    with pytest.raises(StageError) as info:
        run_pipeline(TWO_UNIT_JOBS, opt_guess=1)
    assert info.value.stage == "build_trc"
    assert isinstance(info.value.__cause__, InfeasibleError)


def test_cover_ledger_on_worked_example():
    run = solve_capcover(two_point_instance())
    led = run.ledger
    assert set(led.selection) == {"z2", "z3"}
    assert led.total <= (led.gamma + 1) * led.beta * led.w_star


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_pipeline_properties(seed):
    inst = random_gsp(random.Random(seed), max_jobs=4, max_machines=3, max_size=5)
    led = run_pipeline(inst, oracle=True).ledger
    cov = led.cover.ledger
    assert led.ok, led.flags
    assert cov.total <= (cov.gamma + 1) * cov.beta * cov.w_star
    assert led.final_cost >= led.brute_force_opt
    assert led.final_cost <= GUESS_FACTOR * led.gamma * led.brute_force_opt
    _, grid_opt = brute_force_gsp(inst, led.candidates)
    assert grid_opt == led.brute_force_opt


def test_determinism():
    inst = random_gsp(random.Random(7))
    a = json.dumps(run_pipeline(inst, oracle=True).ledger.to_json())
    b = json.dumps(run_pipeline(inst, oracle=True).ledger.to_json())
    assert a == b


def test_exact_and_decimal():
    assert exact_and_decimal(Fraction(1, 3)) == {"exact": "1/3", "decimal": "0.333333333"}
    assert exact_and_decimal(None) is None
