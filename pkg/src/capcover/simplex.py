"""Dense two-phase primal simplex with Bland's rule.

Solves ``min c.x  s.t.  A x >= b,  0 <= x <= ub`` in floating point. Sizes
here are small (hundreds of rows), so a full tableau is fine; Bland's rule
keeps the pivot sequence deterministic and cycle-free.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError

PIVOT_EPS = 1e-9


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])
    T[np.abs(T) < 1e-13] = 0.0


def _run(T: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> int:
    """Bland-rule iterations on tableau ``T`` (last row = reduced costs,
    last column = rhs). Only columns ``< allowed`` may enter."""
    it = 0
    rows = T.shape[0] - 1
    while True:
        reduced = T[-1, :allowed]
        entering = next((j for j in range(allowed) if reduced[j] < -PIVOT_EPS), None)
        if entering is None:
            return it
        col = T[:rows, entering]
        best = None
        for i in range(rows):
            if col[i] > PIVOT_EPS:
                ratio = T[i, -1] / col[i]
                key = (ratio, basis[i])
                if best is None or key[0] < best[0] - 1e-12 or (
                    abs(key[0] - best[0]) <= 1e-12 and key[1] < best[1]
                ):
                    best = (ratio, basis[i], i)
        if best is None:
            raise ArithmeticError("LP unbounded")
        _pivot(T, best[2], entering)
        basis[best[2]] = entering
        it += 1
        if it > max_iter:
            raise ArithmeticError(f"simplex exceeded {max_iter} iterations")


def solve_lp(
    c: Sequence[float],
    A: Sequence[Sequence[float]],
    b: Sequence[float],
    ub: Sequence[float] | None = None,
    feas_tol: float = 1e-7,
    max_iter: int = 200_000,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float)
    r = A.shape[0]
    ub_rows = [] if ub is None else [j for j in range(n) if np.isfinite(ub[j])]
    q = len(ub_rows)
    rows = r + q

    # columns: x (n) | surplus (r) | ub slack (q) | artificial (k) | rhs
    needs_art = [i for i in range(r) if b[i] > 0]
    k = len(needs_art)
    width = n + r + q + k + 1
    T = np.zeros((rows + 1, width))
    basis = [0] * rows
    art_col = {}
    for i in range(r):
        if b[i] > 0:
            T[i, :n] = A[i]
            T[i, n + i] = -1.0
            T[i, -1] = b[i]
            col = n + r + q + len(art_col)
            art_col[i] = col
            T[i, col] = 1.0
            basis[i] = col
        else:
            T[i, :n] = -A[i]
            T[i, n + i] = 1.0
            T[i, -1] = -b[i]
            basis[i] = n + i
    for k_row, j in enumerate(ub_rows):
        i = r + k_row
        T[i, j] = 1.0
        T[i, n + r + k_row] = 1.0
        T[i, -1] = ub[j]
        basis[i] = n + r + k_row

    iters = 0
    if k:
        # phase 1 objective: sum of artificials, expressed in non-basic terms
        for i in art_col:
            T[-1] -= T[i]
        for col in art_col.values():
            T[-1, col] = 0.0
        iters += _run(T, basis, n + r + q + k, max_iter)
        if -T[-1, -1] > feas_tol * max(1.0, float(np.abs(b).max(initial=0.0))):
            raise InfeasibleError(f"LP infeasible (phase-1 residual {-T[-1, -1]:.3g})")
        art_start = n + r + q
        keep = []
        for i in range(rows):
            if basis[i] >= art_start:
                j = next((j for j in range(art_start) if abs(T[i, j]) > PIVOT_EPS), None)
                if j is None:
                    continue  # redundant row
                _pivot(T, i, j)
                basis[i] = j
            keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, list(range(art_start, art_start + k)), axis=1)
        rows = len(keep)

    T[-1] = 0.0
    T[-1, :n] = c
    for i, bv in enumerate(basis):
        if T[-1, bv] != 0.0:
            T[-1] -= T[-1, bv] * T[i]
    iters += _run(T, basis, T.shape[1] - 1, max_iter)

    x = np.zeros(T.shape[1] - 1)
    for i, bv in enumerate(basis):
        x[bv] = T[i, -1]
    x = x[:n]
    return LPResult(x=x, value=float(c @ x), iterations=iters)
