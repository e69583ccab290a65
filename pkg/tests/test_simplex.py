from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from capcover.errors import InfeasibleError
from capcover.simplex import solve_lp


def test_small_cover_lp():
    # min x + 2y  s.t. x + y >= 1, x <= 1, y <= 1
    res = solve_lp([1, 2], [[1, 1]], [1], ub=[1, 1])
    assert res.value == pytest.approx(1)
    assert res.x == pytest.approx([1, 0])


def test_requires_both_items():
    res = solve_lp([3, 1], [[1, 1]], [2], ub=[1, 1])
    assert res.value == pytest.approx(4)


def test_infeasible():
    with pytest.raises(InfeasibleError):
        solve_lp([1, 1], [[1, 1]], [3], ub=[1, 1])


def test_unbounded():
    with pytest.raises(ArithmeticError):
        solve_lp([-1], [[1]], [0])


def test_non_positive_rhs_rows_start_slack():
    res = solve_lp([1, 1], [[1, -1], [1, 1]], [-2, 0], ub=[1, 1])
    assert res.value == pytest.approx(0)


def test_redundant_rows():
    res = solve_lp([1, 1], [[1, 1], [1, 1], [2, 2]], [1, 1, 2], ub=[1, 1])
    assert res.value == pytest.approx(1)


def test_deterministic():
    A = [[1, 1, 0], [0, 1, 1], [1, 0, 1]]
    a = solve_lp([1, 1, 1], A, [1, 1, 1], ub=[1, 1, 1])
    b = solve_lp([1, 1, 1], A, [1, 1, 1], ub=[1, 1, 1])
    assert np.array_equal(a.x, b.x) and a.iterations == b.iterations


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(0, 10 ** 6),
    n=st.integers(1, 9),
    r=st.integers(1, 8),
)
def test_matches_scipy(seed, n, r):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 5, size=(r, n)).astype(float)
    A[rng.random((r, n)) < 0.3] = 0.0
    b = rng.integers(0, 6, size=r).astype(float)
    c = rng.integers(0, 10, size=n).astype(float)
    ref = linprog(c, A_ub=-A, b_ub=-b, bounds=[(0, 1)] * n, method="highs")
    if ref.status == 2:
        with pytest.raises(InfeasibleError):
            solve_lp(c, A, b, ub=[1.0] * n)
        return
    assert ref.status == 0
    ours = solve_lp(c, A, b, ub=[1.0] * n)
    assert ours.value == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(A @ ours.x >= b - 1e-7)
    assert np.all(ours.x >= -1e-9) and np.all(ours.x <= 1 + 1e-9)
