"""Capacity profiles on the line: rectangles, right triangles, piecewise-linear.

All coordinates and capacities are exact ``Fraction`` values. A profile is
supported on ``[a, b]``; either end may be marked open, which is only used
when a piecewise-linear profile is cut into consecutive pieces that must not
double count their shared breakpoint.
"""
from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

from .errors import InstanceError

Number = Union[int, Fraction, str, float]


def frac(value: Number) -> Fraction:
    """Exact conversion; floats go through ``str`` so 0.1 stays 1/10."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InstanceError(f"expected a number, got {value!r}")
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _fmt(x: Fraction):
    return int(x) if x.denominator == 1 else str(x)


@dataclass(frozen=True)
class Profile:
    id: str
    a: Fraction
    b: Fraction
    cost: Fraction
    prov: tuple | None = None
    open_lo: bool = False
    open_hi: bool = False

    kind = "abstract"

    def contains(self, x: Fraction) -> bool:
        if x < self.a or x > self.b:
            return False
        if self.open_lo and x == self.a:
            return False
        return not (self.open_hi and x == self.b)

    def capacity(self, x: Fraction) -> Fraction:
        if not self.contains(x):
            return Fraction(0)
        return self._value(x)

    def _value(self, x: Fraction) -> Fraction:
        raise NotImplementedError

    def segments(self) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Linear pieces ``(x0, y0, x1, y1)`` of the graph over the support."""
        raise NotImplementedError

    def _base_json(self) -> dict:
        out = {"id": self.id, "kind": self.kind}
        if self.open_lo or self.open_hi:
            out["open"] = {(True, False): "left", (False, True): "right", (True, True): "both"}[
                (self.open_lo, self.open_hi)
            ]
        return out

    def _tail_json(self, out: dict) -> dict:
        out["cost"] = _fmt(self.cost)
        if self.prov is not None:
            out["prov"] = {"job": self.prov[0], "index": self.prov[1]}
        return out


@dataclass(frozen=True)
class Rect(Profile):
    height: Fraction = Fraction(0)

    kind = "rect"

    def _value(self, x):
        return self.height

    def segments(self):
        return [(self.a, self.height, self.b, self.height)]

    def to_json(self) -> dict:
        out = self._base_json()
        out.update(a=_fmt(self.a), b=_fmt(self.b), h=_fmt(self.height))
        return self._tail_json(out)


@dataclass(frozen=True)
class Triangle(Profile):
    """Right triangle: ``slope*(x-a)`` when rising, ``slope*(b-x)`` when falling."""

    rising: bool = True
    slope: Fraction = Fraction(1)

    kind = "tri"

    def _value(self, x):
        if self.rising:
            return self.slope * (x - self.a)
        return self.slope * (self.b - x)

    def segments(self):
        return [(self.a, self._value(self.a), self.b, self._value(self.b))]

    def to_json(self) -> dict:
        out = self._base_json()
        out.update(
            a=_fmt(self.a),
            b=_fmt(self.b),
            dir="rise" if self.rising else "fall",
            slope=_fmt(self.slope),
        )
        return self._tail_json(out)


@dataclass(frozen=True)
class PiecewiseLinear(Profile):
    pts: tuple = field(default=())

    kind = "pwl"

    def _value(self, x):
        pts = self.pts
        for (x0, y0), (x1, y1) in itertools.pairwise(pts):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        return Fraction(0)

    def segments(self):
        return [(x0, y0, x1, y1) for (x0, y0), (x1, y1) in zip(self.pts, self.pts[1:])]

    def to_json(self) -> dict:
        out = self._base_json()
        out["pts"] = [[_fmt(x), _fmt(y)] for x, y in self.pts]
        return self._tail_json(out)


def rect(id, a, b, h, cost, prov=None) -> Rect:
    return Rect(id=id, a=frac(a), b=frac(b), cost=frac(cost), prov=prov, height=frac(h))


def triangle(id, a, b, cost, rising=True, slope=1, prov=None) -> Triangle:
    return Triangle(
        id=id, a=frac(a), b=frac(b), cost=frac(cost), prov=prov, rising=rising, slope=frac(slope)
    )


def pwl(id, pts, cost, prov=None) -> PiecewiseLinear:
    pts = tuple((frac(x), frac(y)) for x, y in pts)
    return PiecewiseLinear(id=id, a=pts[0][0], b=pts[-1][0], cost=frac(cost), prov=prov, pts=pts)


def profile_from_json(doc: dict, where: str = "profile") -> Profile:
    try:
        kind = doc["kind"]
        pid = str(doc.get("id", where))
        cost = frac(doc["cost"])
        prov = None
        if "prov" in doc and doc["prov"] is not None:
            prov = (doc["prov"].get("job"), doc["prov"].get("index"))
        if kind == "rect":
            p = rect(pid, doc["a"], doc["b"], doc["h"], cost, prov)
            if p.height < 0:
                raise InstanceError(f"{where}.h: height must be >= 0")
        elif kind == "tri":
            direction = doc.get("dir", "rise")
            if direction not in ("rise", "fall"):
                raise InstanceError(f"{where}.dir: expected 'rise' or 'fall'")
            p = triangle(pid, doc["a"], doc["b"], cost, direction == "rise", doc.get("slope", 1), prov)
            if p.slope < 0:
                raise InstanceError(f"{where}.slope: must be >= 0")
        elif kind == "pwl":
            if len(doc["pts"]) < 2:
                raise InstanceError(f"{where}.pts: need at least two points")
            p = pwl(pid, doc["pts"], cost, prov)
            xs = [x for x, _ in p.pts]
            if any(x1 <= x0 for x0, x1 in itertools.pairwise(xs)):
                raise InstanceError(f"{where}.pts: x coordinates must be strictly increasing")
            if any(y < 0 for _, y in p.pts):
                raise InstanceError(f"{where}.pts: capacities must be >= 0")
        else:
            raise InstanceError(f"{where}.kind: unknown profile kind {kind!r}")
    except KeyError as exc:
        raise InstanceError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"{where}: {exc}") from None
    if p.b < p.a:
        raise InstanceError(f"{where}: support [a, b] has b < a")
    if p.cost < 0:
        raise InstanceError(f"{where}.cost: must be >= 0")
    openness = doc.get("open")
    if openness:
        if openness not in ("left", "right", "both"):
            raise InstanceError(f"{where}.open: expected left/right/both")
        p = _with_open(p, openness in ("left", "both"), openness in ("right", "both"))
    return p


def _with_open(p: Profile, lo: bool, hi: bool) -> Profile:
    return replace(p, open_lo=lo, open_hi=hi)


def decompose_linear(id, a, b, y_a, y_b, cost, prov=None, open_lo=False, open_hi=False) -> list[Profile]:
    """Split the linear profile through ``(a, y_a)``, ``(b, y_b)`` into a
    rectangle at the lower endpoint value plus a right triangle of the same
    support. Both pieces carry the original cost; empty pieces are dropped."""
    a, b, y_a, y_b = frac(a), frac(b), frac(y_a), frac(y_b)
    if y_a < 0 or y_b < 0:
        raise InstanceError(f"{id}: linear profile must be non-negative on its support")
    out: list[Profile] = []
    base = min(y_a, y_b)
    if base > 0:
        out.append(Rect(id=f"{id}/rect", a=a, b=b, cost=frac(cost), prov=prov,
                        open_lo=open_lo, open_hi=open_hi, height=base))
    if y_a != y_b and b > a:
        slope = abs(y_b - y_a) / (b - a)
        out.append(Triangle(id=f"{id}/tri", a=a, b=b, cost=frac(cost), prov=prov,
                            open_lo=open_lo, open_hi=open_hi, rising=y_b > y_a, slope=slope))
    return out


def decompose_pwl(p: PiecewiseLinear) -> list[Profile]:
    """Cut a piecewise-linear profile into per-segment rectangle/triangle pieces.

    Every segment except the last is right-open so shared breakpoints are not
    counted twice. A profile with s segments yields at most 2s pieces.
    """
    out: list[Profile] = []
    segs = p.segments()
    for k, (x0, y0, x1, y1) in enumerate(segs):
        last = k == len(segs) - 1
        lo_open = p.open_lo if k == 0 else False
        hi_open = p.open_hi if last else True
        out.extend(decompose_linear(f"{p.id}/{k}", x0, x1, y0, y1, p.cost, p.prov, lo_open, hi_open))
    return out


def total_capacity(profiles: Iterable[Profile], x: Fraction) -> Fraction:
    return sum((z.capacity(x) for z in profiles), Fraction(0))
