"""Scheduling -> rectangle/triangle capacitated cover.

A job with size ``p`` and deadline ``c`` contributes the wedge
``u(t) = min(p, c - t)`` (0 after ``c``) towards demand ``v - m*t`` at each
integer time ``t``. Consecutive candidate wedges of one job differ by a
trapezoid, and each trapezoid is split into at most one rectangle and two
slope-1 right triangles.

Split convention: pieces are closed integer intervals whose capacities sum
to the trapezoid exactly at every integer point. The rectangle keeps the
whole flat top; each triangle stops one unit short of the flat top.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass
from fractions import Fraction

from .errors import InfeasibleError, SizeLimitError
from .gsp import CandidateDeadlines, GspInstance
from .kclp import CapCoverInstance, DemandPoint
from .profiles import Profile, Rect, Triangle


def wedge_value(p: int, c: int, t: int) -> int:
    if t > c:
        return 0
    return min(p, c - t)


@dataclass(frozen=True)
class Trapezoid:
    job: str
    index: int
    size: int
    deadline: int
    prev_deadline: int | None
    cost: Fraction

    def value(self, t: int) -> int:
        out = wedge_value(self.size, self.deadline, t)
        if self.prev_deadline is not None:
            out -= wedge_value(self.size, self.prev_deadline, t)
        return out


def build_trapezoids(candidates: CandidateDeadlines) -> list[Trapezoid]:
    out = []
    for jc in candidates.jobs:
        prev = None
        for i, (c, cost) in enumerate(zip(jc.deadlines, jc.costs)):
            out.append(Trapezoid(jc.job, i, jc.size, c, prev, Fraction(0) if i == 0 else cost))
            prev = c
    return out


def split_trapezoid(T: Trapezoid) -> list[Profile]:
    """Rising triangle, flat rectangle and falling triangle; empty pieces dropped.

    With ``h`` the trapezoid height the rise has its foot at ``c_prev - p`` and
    peaks at ``c_prev - p + h``; the top is flat until ``c - h``; the fall
    reaches zero at ``c``. Rectangles are clipped to ``t >= 0``; a rising
    triangle keeps its (possibly negative) foot so it stays a right triangle.
    """
    p, c = T.size, T.deadline
    prov = (T.job, T.index)
    tag = f"{T.job}/{T.index}"
    cost = T.cost
    pieces: list[Profile] = []
    if T.prev_deadline is None:
        h = p
        flat_lo = None
    else:
        h = min(p, c - T.prev_deadline)
        foot = T.prev_deadline - p
        flat_lo = foot + h
        # nonzero integer points of the rise are (foot, flat_lo - 1]
        if flat_lo - 1 > max(foot, -1):
            pieces.append(Triangle(id=f"{tag}/rise", a=Fraction(foot), b=Fraction(flat_lo - 1),
                                   cost=cost, prov=prov, rising=True, slope=Fraction(1)))
    if h <= 0:
        return pieces
    lo = 0 if flat_lo is None else max(0, flat_lo)
    hi = c - h
    if hi >= lo:
        pieces.append(Rect(id=f"{tag}/rect", a=Fraction(lo), b=Fraction(hi), cost=cost,
                           prov=prov, height=Fraction(h)))
    fall_lo = c - h + 1
    if c - 1 >= max(fall_lo, 0):
        pieces.append(Triangle(id=f"{tag}/fall", a=Fraction(fall_lo), b=Fraction(c),
                               cost=cost, prov=prov, rising=False, slope=Fraction(1)))
    return pieces


def reduce_points(v: int, profiles: Iterable[Profile]) -> list[int]:
    """Endpoints of the maximal runs of ``0..v`` sharing the same set of
    supporting intervals (supports clipped to ``[0, v]``)."""
    cuts = {0, v + 1}
    for z in profiles:
        lo = max(0, _ceil(z.a))
        hi = min(v, _floor(z.b))
        if lo > hi:
            continue
        cuts.add(lo)
        cuts.add(hi + 1)
    cuts = sorted(x for x in cuts if 0 <= x <= v + 1)
    out = set()
    for lo, nxt in itertools.pairwise(cuts):
        out.add(lo)
        out.add(nxt - 1)
    return sorted(out)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def trc_pieces(candidates: CandidateDeadlines) -> list[Profile]:
    pieces = []
    for T in build_trapezoids(candidates):
        pieces.extend(split_trapezoid(T))
    return pieces


def build_trc(inst: GspInstance, candidates: CandidateDeadlines) -> CapCoverInstance:
    pieces = trc_pieces(candidates)
    v, m = inst.v, inst.machines
    points = []
    for b in reduce_points(v, pieces):
        d = v - m * b
        if d > 0:
            points.append(DemandPoint(id=f"b{b}", x=Fraction(b), demand=Fraction(d)))
    return CapCoverInstance(tuple(points), tuple(pieces))


def cover_to_deadlines(cover: Iterable[Profile], candidates: CandidateDeadlines) -> dict[str, int]:
    """Deadline of each job = candidate of the highest trapezoid index touched."""
    top = {jc.job: 0 for jc in candidates.jobs}
    for z in cover:
        if z.prov is None:
            raise ValueError(f"profile {z.id} has no job/index provenance")
        job, index = z.prov
        top[job] = max(top[job], index)
    return {job: candidates[job].deadlines[i] for job, i in top.items()}


def trapezoid_capacity(trapezoids: Iterable[Trapezoid], t: int) -> int:
    return sum(T.value(t) for T in trapezoids)


def brute_force_trapezoid_cover(inst: GspInstance, candidates: CandidateDeadlines, cap: int = 16):
    """Cheapest set of whole trapezoids meeting every demand ``v - m*b``.

    Zero-cost trapezoids are always taken (extra capacity never hurts), so
    only the positive-cost ones are enumerated.
    """
    traps = build_trapezoids(candidates)
    free = [T for T in traps if T.cost == 0]
    paid = [T for T in traps if T.cost > 0]
    if len(paid) > cap:
        raise SizeLimitError(f"{len(paid)} priced trapezoids exceeds enumeration cap {cap}")
    v, m = inst.v, inst.machines
    times = [b for b in range(v + 1) if v - m * b > 0]
    need = [v - m * b - trapezoid_capacity(free, b) for b in times]
    cols = [[T.value(b) for b in times] for T in paid]
    best = None
    for mask in range(1 << len(paid)):
        chosen = [i for i in range(len(paid)) if mask >> i & 1]
        cost = sum((paid[i].cost for i in chosen), Fraction(0))
        if best is not None and cost >= best[1]:
            continue
        if all(sum(cols[i][k] for i in chosen) >= need[k] for k in range(len(times))):
            best = (free + [paid[i] for i in chosen], cost)
    if best is None:
        raise InfeasibleError("trapezoids cannot meet the demands")
    return best
