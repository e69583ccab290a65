"""Acceptance criteria 1-8, each at its stated tolerance and time budget."""
from __future__ import annotations

import time
from fractions import Fraction

from capcover.kclp import solve_kc_lp, verify_capcover
from capcover.suites import (
    two_point_instance,
    gap_instance,
    suite_claims,
    suite_claims_dense,
    suite_end_to_end,
    suite_envelopes,
    suite_feasibility,
    suite_kc_gap,
    suite_point_reduction,
    suite_sandwich,
)


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def _suite_line(results, dt, budget):
    parts = ", ".join(f"{r.name}: {r.violations}/{r.trials} violations" for r in results)
    return f"{parts}; {dt:.2f}s (budget {budget}s)"


def test_criterion_1_two_point(acceptance):
    t0 = time.perf_counter()
    inst = two_point_instance()
    u, v = inst.points
    z2, z3 = inst.profile("z2"), inst.profile("z3")
    values = (inst.cap(z2, u), inst.cap(z3, u), inst.cap(z2, v), inst.cap(z3, v))
    both = verify_capcover(inst, ["z2", "z3"])
    alone = verify_capcover(inst, ["z3"])
    dt = time.perf_counter() - t0
    ok = values == (2, 0, 5, 2) and both is True and alone is False and dt < 1
    acceptance(1, ok, f"{{z2,z3}} feasible={both}, {{z3}} feasible={alone}, capacities {tuple(map(str, values))}; {dt:.3f}s")
    assert values == (2, 0, 5, 2)
    assert both is True and alone is False
    assert dt < 1


def test_criterion_2_feasibility_equivalence(acceptance):
    res, dt = _timed(suite_feasibility, 200)
    ok = res.trials == 200 and res.violations == 0 and dt < 30
    acceptance(2, ok, _suite_line([res], dt, 30))
    assert res.violations == 0, res.details
    assert dt < 30


def test_criterion_3_claims(acceptance):
    t0 = time.perf_counter()
    lp_driven = suite_claims(200, covers_per=50, beta=8)
    dense = suite_claims_dense(200, covers_per=50, beta=8)
    dt = time.perf_counter() - t0
    ok = lp_driven.violations == 0 and dense.violations == 0 and dt < 60
    acceptance(3, ok, _suite_line([lp_driven, dense], dt, 60))
    assert lp_driven.violations == 0, lp_driven.details
    assert dense.violations == 0, dense.details
    assert dt < 60


def test_criterion_4_kc_gap(acceptance):
    t0 = time.perf_counter()
    res = suite_kc_gap(200, bound=2 + 1e-5)
    classic = solve_kc_lp(gap_instance()).objective
    dt = time.perf_counter() - t0
    ok = res.violations == 0 and classic >= 1 - Fraction(1, 10 ** 6) and dt < 30
    acceptance(4, ok, _suite_line([res], dt, 30) + f"; gap instance KC value {classic}")
    assert res.violations == 0, res.details
    assert classic >= 1 - Fraction(1, 10 ** 6)
    assert dt < 30


def test_criterion_5_end_to_end(acceptance):
    res, dt = _timed(suite_end_to_end, 100)
    ok = res.trials == 100 and res.violations == 0 and dt < 120
    acceptance(5, ok, _suite_line([res], dt, 120))
    assert res.violations == 0, res.details
    assert dt < 120


def test_criterion_6_sandwich(acceptance):
    res, dt = _timed(suite_sandwich, 50)
    ok = res.trials == 50 and res.violations == 0 and dt < 60
    acceptance(6, ok, _suite_line([res], dt, 60))
    assert res.violations == 0, res.details
    assert dt < 60


def test_criterion_7_envelopes(acceptance):
    res, dt = _timed(suite_envelopes, 100, max_t=50, samples=1000)
    ok = res.trials == 200 and res.violations == 0 and dt < 60
    acceptance(7, ok, _suite_line([res], dt, 60))
    assert res.violations == 0, res.details
    assert dt < 60


def test_criterion_8_point_reduction(acceptance):
    res, dt = _timed(suite_point_reduction, 100)
    ok = res.trials >= 100 and res.violations == 0 and dt < 30
    acceptance(8, ok, _suite_line([res], dt, 30))
    assert res.violations == 0, res.details
    assert dt < 30
