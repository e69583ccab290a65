"""Lift a residual capacitated instance to an uncapacitated multi-cover.

Each residual point ``p`` with demand ``d`` becomes points at heights
``d / 2**j``; profile ``z`` covers the one at level ``j`` iff
``c_z(p) >= d / 2**j``, and that point must be covered
``floor(sum of scaled x over profiles reaching it)`` times.

Level range: the default (``levels="full"``) runs ``j`` up to the class of
the smallest positive capacity among residual profiles at ``p``, so every
profile that helps ``p`` at all is visible to the lifted instance. With
``levels="log"`` it stops at ``floor(log2 d)``, which can hide the mass of
small profiles; ``tests/test_lift.py`` exhibits an instance where the
mapped-back cover then misses its demand.
"""
from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from .errors import InfeasibleError, InternalConsistencyError
from .geomcover import ElementSpec, SetCoverInstance, SetSpec
from .kclp import ResidualInstance, verify_capcover


def floor_log2(d: Fraction) -> int:
    """Largest ``j >= 0`` with ``2**j <= d``; 0 when ``d < 2``."""
    j = 0
    while 2 ** (j + 1) <= d:
        j += 1
    return j


def profile_class(capacity: Fraction, demand: Fraction, j_max: int | None = None) -> int | None:
    """Smallest ``j`` in ``0..j_max`` with ``capacity >= demand / 2**j``.

    ``j_max`` defaults to ``floor(log2 demand)``; returns None past it.
    """
    capacity, demand = Fraction(capacity), Fraction(demand)
    if demand <= 0:
        raise ValueError("residual demand must be > 0")
    if j_max is None:
        j_max = floor_log2(demand)
    threshold = demand
    for j in range(j_max + 1):
        if capacity >= threshold:
            return j
        threshold /= 2
    return None


def _smallest_level(capacity: Fraction, demand: Fraction) -> int:
    j = 0
    while capacity * 2 ** j < demand:
        j += 1
    return j


@dataclass
class LiftedPoint:
    id: str
    point: str
    level: int
    height: Fraction
    req: int


@dataclass
class LiftedInstance:
    residual: ResidualInstance
    elements: list[LiftedPoint]
    classes: dict[tuple[str, str], int | None]  # (profile id, point id) -> class
    j_max: dict[str, int]
    uncovered_points: list[str] = field(default_factory=list)

    def members(self, zid: str) -> list[str]:
        return [e.id for e in self.elements if self.covers(zid, e)]

    def covers(self, zid: str, e: LiftedPoint) -> bool:
        cl = self.classes.get((zid, e.point))
        return cl is not None and cl <= e.level

    def to_setcover(self) -> SetCoverInstance:
        res = self.residual
        elements = [ElementSpec(e.id, e.req, {"point": e.point, "level": e.level}) for e in self.elements]
        sets = [
            SetSpec(zid, res.inst.profile(zid).cost, tuple(self.members(zid)), {"profile": zid})
            for zid in res.remaining
        ]
        return SetCoverInstance(tuple(elements), tuple(sets))


def build_lifted(res: ResidualInstance, levels: str = "full") -> LiftedInstance:
    if levels not in ("full", "log"):
        raise ValueError(f"levels: expected 'full' or 'log', got {levels!r}")
    inst = res.inst
    elements = []
    classes = {}
    j_max = {}
    flagged = []
    for p in res.points():
        d = res.residual[p.id]
        top = floor_log2(d)
        if levels == "full":
            for zid in res.remaining:
                c = inst.cap(inst.profile(zid), p)
                if c > 0 and res.x_scaled[zid] > 0:
                    top = max(top, _smallest_level(c, d))
        j_max[p.id] = top
        mass = [Fraction(0)] * (top + 1)
        for zid in res.remaining:
            cl = profile_class(inst.cap(inst.profile(zid), p), d, top)
            classes[(zid, p.id)] = cl
            if cl is not None:
                mass[cl] += res.x_scaled[zid]
        if all(classes[(zid, p.id)] is None for zid in res.remaining):
            flagged.append(p.id)
        cumulative = Fraction(0)
        for j in range(top + 1):
            cumulative += mass[j]
            req = floor(cumulative)
            if req > 0:
                elements.append(LiftedPoint(f"{p.id}@{j}", p.id, j, d / 2 ** j, req))
    return LiftedInstance(res, elements, classes, j_max, flagged)


@dataclass
class InducedSolution:
    x: dict[str, Fraction]
    coverage: dict[str, Fraction]
    objective: Fraction


def induced_fractional(lifted: LiftedInstance) -> InducedSolution:
    """Carry the scaled LP values over to the lifted sets and check coverage
    exactly. A shortfall means an upstream bug."""
    res = lifted.residual
    x = {zid: res.x_scaled[zid] for zid in res.remaining}
    coverage = {}
    for e in lifted.elements:
        cov = sum((x[zid] for zid in res.remaining if lifted.covers(zid, e)), Fraction(0))
        coverage[e.id] = cov
        if cov < e.req:
            raise InternalConsistencyError(f"lifted point {e.id} covered {cov} < requirement {e.req}")
    objective = sum((res.inst.profile(zid).cost * v for zid, v in x.items()), Fraction(0))
    return InducedSolution(x, coverage, objective)


@dataclass
class MapBack:
    selection: tuple[str, ...]
    verdict: bool


def lifted_cover_feasible(lifted: LiftedInstance, selection: Iterable[str]) -> bool:
    chosen = set(selection)
    return all(sum(1 for zid in chosen if lifted.covers(zid, e)) >= e.req for e in lifted.elements)


def map_back(lifted: LiftedInstance, selection: Iterable[str]) -> MapBack:
    selection = tuple(dict.fromkeys(selection))
    res = lifted.residual
    unknown = [k for k in selection if k not in res.remaining]
    if unknown:
        raise ValueError(f"selection names sets outside the residual family: {unknown}")
    if not lifted_cover_feasible(lifted, selection):
        raise InfeasibleError("selection does not satisfy the lifted requirements")
    verdict = verify_capcover(res.inst, selection, res.residual)
    return MapBack(selection, verdict)


@dataclass
class CoverLedger:
    beta: Fraction
    w_star: Fraction
    heavy_cost: Fraction
    lifted_lp_value: Fraction
    rounded_cost: Fraction
    gamma: Fraction
    total: Fraction
    bound: Fraction
    selection: tuple[str, ...]

    @property
    def within_bound(self) -> bool:
        return self.total <= self.bound


def measured_gamma(rounded: Fraction, lp_value: Fraction) -> Fraction:
    """Rounded cost over lifted LP value; 1 when both vanish."""
    if lp_value > 0:
        return Fraction(rounded) / lp_value
    if rounded == 0:
        return Fraction(1)
    raise ZeroDivisionError("positive rounded cost against zero LP value")


def compose_final(
    res: ResidualInstance,
    lifted_selection: Iterable[str],
    w_star: Fraction,
    lifted_lp_value: Fraction,
    induced: InducedSolution | None = None,
) -> CoverLedger:
    """Union of the heavy sets and the mapped-back lifted cover, with the cost
    accounting ``total <= (gamma + 1) * beta * w_star``.

    The lifted LP value is capped by the induced solution's objective: that
    solution is feasible, so the true optimum can be no larger.
    """
    inst = res.inst
    lifted_selection = tuple(lifted_selection)
    lp_value = Fraction(lifted_lp_value)
    if induced is not None:
        lp_value = min(lp_value, induced.objective)
    rounded = sum((inst.profile(k).cost for k in lifted_selection), Fraction(0))
    gamma = measured_gamma(rounded, lp_value)
    heavy = res.heavy_cost
    total = heavy + rounded
    return CoverLedger(
        beta=res.beta,
        w_star=Fraction(w_star),
        heavy_cost=heavy,
        lifted_lp_value=lp_value,
        rounded_cost=rounded,
        gamma=gamma,
        total=total,
        bound=(gamma + 1) * res.beta * Fraction(w_star),
        selection=tuple(res.heavy) + lifted_selection,
    )
