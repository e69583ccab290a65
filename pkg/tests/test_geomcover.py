from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcover.errors import InfeasibleError, InstanceError, SizeLimitError
from capcover.geomcover import (
    ElementSpec,
    SetCoverInstance,
    SetSpec,
    exact_multicover,
    greedy_multicover,
    is_multicover,
    parse_setcover,
    setcover_lp,
)


def sc(reqs: dict, sets: list[tuple[str, object, tuple]]) -> SetCoverInstance:
    return SetCoverInstance(
        tuple(ElementSpec(e, r) for e, r in reqs.items()),
        tuple(SetSpec(s, Fraction(c), cov) for s, c, cov in sets),
    )


CHEAP_FIRST = sc({"e": 1}, [("s1", 1, ("e",)), ("s2", 3, ("e",))])
NEEDS_TWO = sc({"e": 2}, [("s1", 1, ("e",)), ("s2", 2, ("e",)), ("s3", 4, ("e",))])
PAIR = sc({"e1": 1, "e2": 1}, [("pair", 2, ("e1", "e2")), ("a", "3/2", ("e1",)), ("b", "3/2", ("e2",))])


def test_greedy_examples():
    assert greedy_multicover(CHEAP_FIRST).selected == ("s1",)
    cov = greedy_multicover(NEEDS_TWO)
    assert set(cov.selected) == {"s1", "s2"} and cov.cost == 3
    assert greedy_multicover(PAIR).selected == ("pair",)


def test_greedy_tie_breaks_on_cost_then_id():
    inst = sc({"e": 1, "f": 1}, [("b", 2, ("e", "f")), ("a", 2, ("e", "f")), ("c", 1, ("e",))])
    # densities: a=b=1, c=1; lower cost wins among equal densities
    assert greedy_multicover(inst).selected[0] == "c"
    inst = sc({"e": 1}, [("b", 1, ("e",)), ("a", 1, ("e",))])
    assert greedy_multicover(inst).selected == ("a",)


def test_exact_examples():
    cov = exact_multicover(PAIR)
    assert cov.selected == ("pair",) and cov.cost == 2
    forced = sc({"e": 1}, [("only", 5, ("e",))])
    assert exact_multicover(forced).selected == ("only",)
    with pytest.raises(InfeasibleError):
        exact_multicover(sc({"e": 2}, [("s", 1, ("e",))]))
    with pytest.raises(InfeasibleError):
        greedy_multicover(sc({"e": 2}, [("s", 1, ("e",))]))


def test_exact_cap():
    inst = sc({"e": 1}, [(f"s{k}", 1, ("e",)) for k in range(5)])
    with pytest.raises(SizeLimitError):
        exact_multicover(inst, cap=4)


def test_lp_examples():
    assert Fraction(setcover_lp(sc({"e": 1}, [("s1", 1, ("e",)), ("s2", 1, ("e",))])).value) == 1
    assert Fraction(setcover_lp(sc({"e": 2}, [(f"s{k}", 1, ("e",)) for k in range(3)])).value) == 2
    assert Fraction(setcover_lp(PAIR).value) == 2


def test_lp_value_against_vertex_enumeration():
    # PAIR has 3 variables in [0, 1]; the optimum sits on a vertex of the box-and-cover polytope
    best = None
    for pair in (0, 1):
        for a in (0, 1):
            for b in (0, 1):
                if pair + a >= 1 and pair + b >= 1:
                    val = 2 * pair + Fraction(3, 2) * (a + b)
                    best = val if best is None else min(best, val)
    assert Fraction(setcover_lp(PAIR).value) == best == 2


def brute_force(inst):
    best = None
    ids = [s.id for s in inst.sets]
    costs = {s.id: s.cost for s in inst.sets}
    for r in range(len(ids) + 1):
        for sub in combinations(ids, r):
            if is_multicover(inst, sub):
                c = sum((costs[k] for k in sub), Fraction(0))
                best = c if best is None else min(best, c)
    return best


def random_sc(rng, max_sets=12):
    n_el = rng.randint(1, 5)
    n_sets = rng.randint(1, max_sets)
    els = [f"e{k}" for k in range(n_el)]
    sets = []
    for k in range(n_sets):
        cov = tuple(e for e in els if rng.random() < 0.5)
        sets.append((f"s{k:02d}", rng.randint(0, 9), cov))
    counts = {e: sum(e in s[2] for s in sets) for e in els}
    reqs = {e: rng.randint(1, counts[e]) for e in els if counts[e] > 0}
    sets = [(s, c, tuple(e for e in cov if e in reqs)) for s, c, cov in sets]
    return sc(reqs, sets)


@settings(max_examples=300, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_dominance_chain(seed):
    inst = random_sc(random.Random(seed))
    greedy = greedy_multicover(inst)
    exact = exact_multicover(inst)
    assert is_multicover(inst, greedy.selected) and is_multicover(inst, exact.selected)
    assert exact.cost == brute_force(inst)
    assert exact.cost <= greedy.cost
    if inst.elements:
        assert Fraction(setcover_lp(inst).value) <= exact.cost + Fraction(1, 10 ** 9)


def test_json_round_trip_and_errors():
    inst = parse_setcover('{"elements":[{"id":"e","req":2}],"sets":[{"id":"s","cost":0.5,"covers":["e"]},{"id":"t","cost":1,"covers":["e"]}]}')
    assert inst.sets[0].cost == Fraction(1, 2)
    assert parse_setcover(__import__("json").dumps(inst.to_json())) == inst
    with pytest.raises(InstanceError, match="req"):
        parse_setcover('{"elements":[{"id":"e","req":0}],"sets":[]}')
    with pytest.raises(InstanceError, match="unknown"):
        parse_setcover('{"elements":[{"id":"e","req":1}],"sets":[{"id":"s","cost":1,"covers":["x"]}]}')
    with pytest.raises(InstanceError):
        parse_setcover("{nope")
