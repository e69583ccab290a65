"""Uncapacitated weighted multi-cover: greedy rounding, exact oracle, LP bound."""
from __future__ import annotations

import json
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, InstanceError, SizeLimitError
from .profiles import frac
from .simplex import solve_lp

DEFAULT_EXACT_CAP = 20


@dataclass(frozen=True)
class ElementSpec:
    id: str
    req: int
    prov: dict | None = None


@dataclass(frozen=True)
class SetSpec:
    id: str
    cost: Fraction
    covers: tuple[str, ...]
    prov: dict | None = None


@dataclass(frozen=True)
class SetCoverInstance:
    elements: tuple[ElementSpec, ...]
    sets: tuple[SetSpec, ...]

    def to_json(self) -> dict:
        def num(x):
            return int(x) if x.denominator == 1 else str(x)

        els = []
        for e in self.elements:
            d = {"id": e.id, "req": e.req}
            if e.prov:
                d["prov"] = e.prov
            els.append(d)
        sets = []
        for s in self.sets:
            d = {"id": s.id, "cost": num(s.cost), "covers": list(s.covers)}
            if s.prov:
                d["prov"] = s.prov
            sets.append(d)
        return {"elements": els, "sets": sets}

    def coverers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {e.id: [] for e in self.elements}
        for s in self.sets:
            for e in s.covers:
                out[e].append(s.id)
        return out

    def check_feasible_family(self) -> None:
        cov = self.coverers()
        for e in self.elements:
            if len(cov[e.id]) < e.req:
                raise InfeasibleError(
                    f"element {e.id} needs {e.req} sets but only {len(cov[e.id])} contain it", witness=e.id
                )


def setcover_from_dict(doc) -> SetCoverInstance:
    try:
        elements = []
        for k, e in enumerate(doc["elements"]):
            req = e["req"]
            if not isinstance(req, int) or req < 1:
                raise InstanceError(f"elements[{k}].req: must be an integer >= 1")
            elements.append(ElementSpec(str(e["id"]), req, e.get("prov")))
        ids = {e.id for e in elements}
        sets = []
        for k, s in enumerate(doc["sets"]):
            covers = tuple(str(c) for c in s.get("covers", []))
            bad = [c for c in covers if c not in ids]
            if bad:
                raise InstanceError(f"sets[{k}].covers: unknown elements {bad}")
            cost = frac(s["cost"])
            if cost < 0:
                raise InstanceError(f"sets[{k}].cost: must be >= 0")
            sets.append(SetSpec(str(s["id"]), cost, tuple(dict.fromkeys(covers)), s.get("prov")))
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"malformed set-cover document: {exc}") from None
    if len({s.id for s in sets}) != len(sets):
        raise InstanceError("sets: ids must be unique")
    return SetCoverInstance(tuple(elements), tuple(sets))


def parse_setcover(text: str) -> SetCoverInstance:
    try:
        return setcover_from_dict(json.loads(text, parse_float=Fraction))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None


@dataclass
class Cover:
    selected: tuple[str, ...]
    cost: Fraction

    def to_json(self) -> dict:
        return {"selected": list(self.selected), "cost": str(self.cost)}


def is_multicover(inst: SetCoverInstance, selected: Iterable[str]) -> bool:
    chosen = set(selected)
    count = {e.id: 0 for e in inst.elements}
    for s in inst.sets:
        if s.id in chosen:
            for e in s.covers:
                count[e] += 1
    return all(count[e.id] >= e.req for e in inst.elements)


def greedy_multicover(inst: SetCoverInstance) -> Cover:
    """Repeatedly take the set with least cost per unit of residual
    requirement it removes; ties go to lower cost, then smaller id."""
    inst.check_feasible_family()
    residual = {e.id: e.req for e in inst.elements}
    remaining = {s.id: s for s in inst.sets}
    chosen = []
    while any(residual.values()):
        best = None
        for s in remaining.values():
            gain = sum(1 for e in s.covers if residual[e] > 0)
            if gain == 0:
                continue
            key = (s.cost / gain, s.cost, s.id)
            if best is None or key < best[0]:
                best = (key, s)
        if best is None:
            raise InfeasibleError("greedy stalled with unmet requirements")
        s = best[1]
        chosen.append(s.id)
        del remaining[s.id]
        for e in s.covers:
            if residual[e] > 0:
                residual[e] -= 1
    return Cover(tuple(chosen), sum((inst_set_cost(inst, k) for k in chosen), Fraction(0)))


def inst_set_cost(inst: SetCoverInstance, sid: str) -> Fraction:
    for s in inst.sets:
        if s.id == sid:
            return s.cost
    raise KeyError(sid)


@dataclass
class LPBound:
    value: float
    x: dict[str, float] = field(default_factory=dict)


def _lp_matrix(elements, sets):
    col = {s.id: i for i, s in enumerate(sets)}
    A = np.zeros((len(elements), len(sets)))
    row = {e.id: i for i, e in enumerate(elements)}
    for s in sets:
        for e in s.covers:
            if e in row:
                A[row[e], col[s.id]] = 1.0
    return A


def setcover_lp(inst: SetCoverInstance) -> LPBound:
    """Basic LP: ``x in [0,1]``, each element covered at least ``req`` times."""
    inst.check_feasible_family()
    if not inst.elements or not inst.sets:
        return LPBound(0.0, {s.id: 0.0 for s in inst.sets})
    A = _lp_matrix(inst.elements, inst.sets)
    b = [float(e.req) for e in inst.elements]
    c = [float(s.cost) for s in inst.sets]
    res = solve_lp(c, A, b, ub=[1.0] * len(inst.sets))
    return LPBound(res.value, {s.id: float(res.x[i]) for i, s in enumerate(inst.sets)})


def exact_multicover(inst: SetCoverInstance, cap: int = DEFAULT_EXACT_CAP) -> Cover:
    """Minimum-cost multi-cover by include/exclude branch and bound.

    Nodes are pruned by feasibility of the remaining family, by a per-element
    cheapest-sets bound, and by the LP relaxation of the residual problem.
    """
    if len(inst.sets) > cap:
        raise SizeLimitError(f"{len(inst.sets)} sets exceeds exact-oracle cap {cap}")
    inst.check_feasible_family()
    sets = sorted(inst.sets, key=lambda s: (s.cost, s.id))
    incumbent = greedy_multicover(inst)
    best = [incumbent.cost, list(incumbent.selected)]
    elem_ids = [e.id for e in inst.elements]

    def bound(i, residual):
        need = [e for e in elem_ids if residual[e] > 0]
        if not need:
            return Fraction(0)
        rest = sets[i:]
        lb = Fraction(0)
        for e in need:
            costs = sorted(s.cost for s in rest if e in s.covers)
            lb = max(lb, sum(costs[: residual[e]], Fraction(0)))
        return lb

    def lp_bound(i, residual):
        rest = sets[i:]
        need = [ElementSpec(e, residual[e]) for e in elem_ids if residual[e] > 0]
        A = _lp_matrix(need, rest)
        res = solve_lp([float(s.cost) for s in rest], A, [float(e.req) for e in need], ub=[1.0] * len(rest))
        return res.value

    def dfs(i, residual, chosen, cost):
        if all(r <= 0 for r in residual.values()):
            if cost < best[0]:
                best[0], best[1] = cost, list(chosen)
            return
        if i == len(sets):
            return
        # family of remaining sets must still be able to meet each requirement
        for e in elem_ids:
            if residual[e] > 0 and sum(1 for s in sets[i:] if e in s.covers) < residual[e]:
                return
        if cost + bound(i, residual) >= best[0]:
            return
        if len(sets) - i > 3 and cost + Fraction(lp_bound(i, residual)) - Fraction(1, 10 ** 9) >= best[0]:
            return
        s = sets[i]
        if any(residual[e] > 0 for e in s.covers):
            nxt = dict(residual)
            for e in s.covers:
                nxt[e] -= 1
            chosen.append(s.id)
            dfs(i + 1, nxt, chosen, cost + s.cost)
            chosen.pop()
        dfs(i + 1, residual, chosen, cost)

    dfs(0, {e.id: e.req for e in inst.elements}, [], Fraction(0))
    order = {s.id: k for k, s in enumerate(inst.sets)}
    return Cover(tuple(sorted(best[1], key=order.get)), best[0])
