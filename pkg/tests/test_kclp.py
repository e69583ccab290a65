from __future__ import annotations

import json
import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcover.errors import InfeasibleError, InstanceError
from capcover.generate import knapsack_instance, random_capcover, random_knapsack
from capcover.kclp import (
    CapCoverInstance,
    DemandPoint,
    ResidualInstance,
    brute_force_capcover,
    capcover_from_dict,
    kc_constraint,
    parse_capcover,
    select_heavy,
    snapshot,
    solve_kc_lp,
    verify_beta_cover,
    verify_capcover,
)
from capcover.profiles import rect
from capcover.simplex import solve_lp
from capcover.suites import two_point_instance


def test_kc_constraint_examples():
    inst = knapsack_instance([4, 4], [1, 1], 5)
    p = inst.points[0]
    assert kc_constraint(inst, p, {"i0"}, {"i1": 1}) == 0
    assert kc_constraint(inst, p, set(), {}) == -5
    exact = knapsack_instance([5, 1], [1, 1], 5)
    with pytest.raises(ValueError, match="void"):
        kc_constraint(exact, exact.points[0], {"i0"}, {})


def test_gap_instance_kc_value_one():
    inst = knapsack_instance([10, 9], [1, 0], 10)
    basic = solve_lp([1.0, 0.0], [[10.0, 9.0]], [10.0], ub=[1.0, 1.0])
    assert basic.value == pytest.approx(0.1)
    sol = solve_kc_lp(inst)
    assert sol.objective == 1
    assert sol.x["i0"] == 1


def test_single_exact_item():
    inst = knapsack_instance([3], [Fraction(7, 2)], 3)
    sol = solve_kc_lp(inst)
    assert sol.x == {"i0": 1} and sol.objective == Fraction(7, 2)


def test_zero_demand_points_dropped():
    doc = {"points": [{"x": 0, "demand": 0}], "profiles": [{"kind": "rect", "a": 0, "b": 1, "h": 1, "cost": 4}]}
    inst = capcover_from_dict(doc)
    assert inst.points == ()
    assert solve_kc_lp(inst).objective == 0


def test_uncoverable_instance_names_point():
    inst = knapsack_instance([2, 2], [1, 1], 5)
    with pytest.raises(InfeasibleError) as info:
        solve_kc_lp(inst)
    assert info.value.witness == "p"


def test_beta_validation():
    inst = knapsack_instance([3], [1], 3)
    with pytest.raises(InstanceError):
        solve_kc_lp(inst, beta=1)
    with pytest.warns(UserWarning, match="beta < 8"):
        solve_kc_lp(inst, beta=4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_kc_lp(inst, beta=8)


def test_snapshot():
    assert snapshot(0.1) == Fraction(1, 10)
    assert snapshot(-1e-15) == 0 and snapshot(1 + 1e-12) == 1
    assert snapshot(0.9999999999996) == 1


# --- heavy selection ---------------------------------------------------------------


def three_item_instance():
    return knapsack_instance([4, 4, 4], [1, 1, 1], 5)


def test_select_heavy_threshold():
    inst = three_item_instance()
    x = {"i0": Fraction(1, 5), "i1": Fraction(1, 8), "i2": Fraction(1, 20)}
    res = select_heavy(inst, x, 8)
    assert res.heavy == ("i0", "i1")
    assert res.x_scaled == {"i2": Fraction(2, 5)}
    assert res.residual == {}


def test_select_heavy_nothing_heavy():
    inst = three_item_instance()
    res = select_heavy(inst, {k: Fraction(1, 10) for k in ("i0", "i1", "i2")}, 8)
    assert res.heavy == () and res.residual == {"p": 5}


def test_select_heavy_everything_heavy():
    inst = three_item_instance()
    res = select_heavy(inst, {k: Fraction(1, 2) for k in ("i0", "i1", "i2")}, 8)
    assert res.remaining == () and res.residual == {}
    assert verify_beta_cover(res)


def test_verify_beta_cover_detects_violation():
    inst = three_item_instance()
    res = ResidualInstance(inst, Fraction(8), (), {"p": Fraction(5)}, ("i0", "i1", "i2"), {"i0": 0, "i1": 0, "i2": 0})
    assert not verify_beta_cover(res)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_solver_output_satisfies_beta_cover(seed):
    inst = random_capcover(random.Random(seed))
    sol = solve_kc_lp(inst)
    res = select_heavy(inst, sol.x)
    assert verify_beta_cover(res)
    assert all(v <= 1 for v in res.x_scaled.values())
    assert all(0 <= v <= 1 for v in sol.x.values())


# --- verification and oracles --------------------------------------------------------


def test_verify_capcover_worked_example():
    inst = two_point_instance()
    assert verify_capcover(inst, ["z2", "z3"])
    assert not verify_capcover(inst, ["z3"])
    assert not verify_capcover(inst, [])


def test_verify_capcover_multiset():
    inst = knapsack_instance([3], [1], 6)
    assert verify_capcover(inst, ["i0", "i0"])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_lp_is_lower_bound(seed):
    inst = random_capcover(random.Random(seed), max_profiles=12)
    _, opt = brute_force_capcover(inst)
    assert solve_kc_lp(inst).objective <= opt + Fraction(1, 10 ** 6)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_kc_gap_two(seed):
    inst = random_knapsack(random.Random(seed))
    lp = solve_kc_lp(inst).objective
    _, opt = brute_force_capcover(inst)
    assert opt <= (2 + 10 * Fraction(1, 10 ** 7)) * lp or (lp == 0 and opt == 0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_adding_a_profile_never_raises_lp_value(seed):
    rng = random.Random(seed)
    inst = random_capcover(rng, max_points=4, max_profiles=6)
    extra = rect("extra", rng.randint(0, 10), rng.randint(10, 20), rng.randint(1, 6), rng.randint(0, 5))
    bigger = CapCoverInstance(inst.points, inst.profiles + (extra,))
    before = solve_kc_lp(inst, separation="exhaustive").objective
    after = solve_kc_lp(bigger, separation="exhaustive").objective
    assert after <= before + Fraction(1, 10 ** 6)


def test_deterministic_solution():
    inst = random_capcover(random.Random(42))
    assert solve_kc_lp(inst).x == solve_kc_lp(inst).x


def test_json_round_trip_and_errors():
    inst = two_point_instance()
    again = parse_capcover(json.dumps(inst.to_json()))
    assert [p.demand for p in again.points] == [1, 7]
    assert verify_capcover(again, ["z2", "z3"])
    with pytest.raises(InstanceError, match="points\\[0\\]"):
        capcover_from_dict({"points": [{"demand": 1}], "profiles": []})
    with pytest.raises(InstanceError, match="unknown profile kind"):
        capcover_from_dict({"points": [], "profiles": [{"kind": "circle", "cost": 1}]})
    with pytest.raises(InstanceError, match="ids must be unique"):
        CapCoverInstance((), (rect("a", 0, 1, 1, 1), rect("a", 0, 1, 1, 1)))
    with pytest.raises(InstanceError, match="demand must be > 0"):
        CapCoverInstance((DemandPoint("p", Fraction(0), Fraction(-1)),), ())
