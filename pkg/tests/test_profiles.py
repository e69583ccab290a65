from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capcover.errors import InstanceError
from capcover.profiles import (
    decompose_linear,
    decompose_pwl,
    frac,
    profile_from_json,
    pwl,
    rect,
    total_capacity,
    triangle,
)


def test_frac():
    assert frac("3/4") == Fraction(3, 4)
    assert frac(0.5) == Fraction(1, 2)
    assert frac(2) == 2


def test_rect_and_triangle_capacity():
    r = rect("r", 0, 4, 3, 1)
    assert r.capacity(Fraction(0)) == 3 and r.capacity(Fraction(4)) == 3 and r.capacity(Fraction(5)) == 0
    t = triangle("t", 1, 6, 1, rising=True, slope=Fraction(1, 2))
    assert t.capacity(Fraction(5)) == 2 and t.capacity(Fraction(1)) == 0
    f = triangle("f", 0, 4, 1, rising=False, slope=2)
    assert f.capacity(Fraction(1)) == 6


def test_decompose_linear():
    parts = decompose_linear("z", 1, 5, 2, 5, 1)
    assert [type(p).__name__ for p in parts] == ["Rect", "Triangle"]
    assert parts[0].height == 2 and parts[1].slope == Fraction(3, 4) and parts[1].rising
    assert [type(p).__name__ for p in decompose_linear("z", 0, 2, 4, 4, 1)] == ["Rect"]
    assert [type(p).__name__ for p in decompose_linear("z", 0, 2, 4, 0, 1)] == ["Triangle"]
    with pytest.raises(InstanceError):
        decompose_linear("z", 0, 1, -1, 2, 1)


@settings(max_examples=200, deadline=None)
@given(
    ys=st.lists(st.integers(0, 9), min_size=2, max_size=5),
    gaps=st.lists(st.integers(1, 4), min_size=4, max_size=4),
    x=st.fractions(min_value=-1, max_value=20, max_denominator=4),
)
def test_pwl_decomposition_preserves_capacity(ys, gaps, x):
    xs = [0]
    for g in gaps[: len(ys) - 1]:
        xs.append(xs[-1] + g)
    z = pwl("z", list(zip(xs, ys)), 1)
    parts = decompose_pwl(z)
    assert len(parts) <= 2 * (len(ys) - 1)
    assert total_capacity(parts, x) == z.capacity(x)


def test_profile_json():
    p = profile_from_json({"kind": "tri", "id": "t", "a": 0, "b": 4, "cost": "1/2", "dir": "fall", "slope": 2})
    assert not p.rising and p.cost == Fraction(1, 2)
    assert profile_from_json(p.to_json()) == p
    r = profile_from_json({"kind": "rect", "id": "r", "a": 0, "b": 4, "h": 1, "cost": 1, "open": "right"})
    assert r.capacity(Fraction(4)) == 0 and profile_from_json(r.to_json()) == r
    for bad in (
        {"kind": "blob", "cost": 1},
        {"kind": "rect", "a": 0, "b": 1, "cost": 1},
        {"kind": "rect", "a": 2, "b": 1, "h": 1, "cost": 1},
        {"kind": "rect", "a": 0, "b": 1, "h": 1, "cost": -1},
        {"kind": "pwl", "pts": [[0, 1], [0, 2]], "cost": 1},
        {"kind": "tri", "a": 0, "b": 1, "cost": 1, "dir": "up"},
    ):
        with pytest.raises(InstanceError):
            profile_from_json(bad)
