"""Upper envelopes of 1-D capacity profiles and Davenport-Schinzel checks.

The envelope is swept over exact rational breakpoints: support endpoints,
segment vertices and pairwise crossings. Between consecutive breakpoints the
vertical order of the profiles is fixed, so each gap is owned by whichever
profile is highest at its midpoint (equal heights go to the smaller id).
"""
from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .profiles import Profile


@dataclass
class Edge:
    object: str
    start: Fraction
    end: Fraction


@dataclass
class EnvelopeReport:
    edges: list[Edge]
    order: int | None = None
    violation: list[int] | None = None
    objects: int = 0

    @property
    def sequence(self) -> list[str]:
        return [e.object for e in self.edges]

    @property
    def count(self) -> int:
        return len(self.edges)

    @property
    def ds_order_ok(self) -> bool | None:
        if self.order is None:
            return None
        return self.violation is None

    @property
    def edges_per_object(self) -> float:
        return self.count / self.objects if self.objects else 0.0

    def owners_at(self, x: Fraction) -> list[str]:
        return [e.object for e in self.edges if e.start <= x <= e.end]

    def to_json(self) -> dict:
        def num(v):
            return int(v) if v.denominator == 1 else str(v)

        out = {
            "edges": [{"object": e.object, "from": num(e.start), "to": num(e.end)} for e in self.edges],
            "count": self.count,
            "ds_order_ok": self.ds_order_ok,
        }
        if self.order is not None:
            out["order"] = self.order
        if self.violation is not None:
            out["violation"] = self.violation
        out["edges_per_object"] = round(self.edges_per_object, 6)
        return out


def _crossing(s, t) -> Fraction | None:
    x0, y0, x1, y1 = s
    u0, v0, u1, v1 = t
    lo, hi = max(x0, u0), min(x1, u1)
    if lo >= hi or x1 == x0 or u1 == u0:
        return None
    m1 = (y1 - y0) / (x1 - x0)
    m2 = (v1 - v0) / (u1 - u0)
    if m1 == m2:
        return None
    # y0 + m1 (x - x0) = v0 + m2 (x - u0)
    x = (v0 - y0 + m1 * x0 - m2 * u0) / (m1 - m2)
    return x if lo < x < hi else None


def upper_envelope(profiles: Sequence[Profile], order: int | None = None) -> EnvelopeReport:
    if not profiles:
        return EnvelopeReport([], order, None, 0)
    xs = set()
    segs = []
    for z in profiles:
        for s in z.segments():
            xs.add(s[0])
            xs.add(s[2])
            segs.append((z.id, s))
    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if segs[i][0] == segs[j][0]:
                continue
            x = _crossing(segs[i][1], segs[j][1])
            if x is not None:
                xs.add(x)
    xs = sorted(xs)
    pieces: list[list] = []
    for lo, hi in itertools.pairwise(xs):
        mid = (lo + hi) / 2
        best = None
        for z in profiles:
            if not z.a < mid < z.b:
                continue
            val = z.capacity(mid)
            if val <= 0:
                continue
            if best is None or val > best[0] or (val == best[0] and z.id < best[1]):
                best = (val, z.id)
        if best is None:
            continue
        if pieces and pieces[-1][0] == best[1] and pieces[-1][2] == lo:
            pieces[-1][2] = hi
        else:
            pieces.append([best[1], lo, hi])
    edges = [Edge(o, a, b) for o, a, b in pieces]
    report = EnvelopeReport(edges, order, None, len(profiles))
    if order is not None:
        report.violation = ds_order_check(report.sequence, order)
    return report


def ds_order_check(sequence: Sequence[str], s: int) -> list[int] | None:
    """Indices of an alternation ``a b a b ...`` of length ``s + 2``, or None.

    For a fixed ordered pair the greedy left-to-right scan finds the longest
    alternation, so it suffices to try every ordered pair of symbols.
    """
    for i in range(len(sequence) - 1):
        if sequence[i] == sequence[i + 1]:
            raise ValueError(f"sequence repeats {sequence[i]!r} at positions {i}, {i + 1}")
    target = s + 2
    positions: dict[str, list[int]] = {}
    for i, sym in enumerate(sequence):
        positions.setdefault(sym, []).append(i)
    symbols = sorted(positions)
    for a in symbols:
        for b in symbols:
            if a == b:
                continue
            merged = sorted(positions[a] + positions[b])
            want, picked = a, []
            for i in merged:
                if sequence[i] == want:
                    picked.append(i)
                    if len(picked) == target:
                        return picked
                    want = b if want == a else a
    return None
