"""Capacitated covering with knapsack-cover strengthening.

The LP ``min sum w_z x_z`` over ``x in [0,1]`` is strengthened, for every
point ``p`` and set ``S`` with ``c_S(p) < d_p``, by

    sum_{z not in S} min(c_z(p), d_p - c_S(p)) x_z >= d_p - c_S(p).

Cuts are separated lazily. Capacities and demands are exact; only the
simplex tableau is floating point, and the returned ``x`` is snapshotted to
12 decimal digits as exact rationals so downstream floors are reproducible.
"""
from __future__ import annotations

import itertools
import json
import logging
import warnings
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import InfeasibleError, InstanceError, SizeLimitError
from .profiles import Profile, frac, profile_from_json
from .simplex import solve_lp

log = logging.getLogger(__name__)

DEFAULT_BETA = 8
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ROUNDS = 200


@dataclass(frozen=True)
class DemandPoint:
    id: str
    x: Fraction
    demand: Fraction


@dataclass(frozen=True)
class CapCoverInstance:
    points: tuple[DemandPoint, ...]
    profiles: tuple[Profile, ...]

    def __post_init__(self):
        for p in self.points:
            if p.demand <= 0:
                raise InstanceError(f"point {p.id}: demand must be > 0")
        ids = [z.id for z in self.profiles]
        if len(set(ids)) != len(ids):
            raise InstanceError("profiles: ids must be unique")

    @cached_property
    def _by_id(self) -> dict[str, Profile]:
        return {z.id: z for z in self.profiles}

    @cached_property
    def _caps(self) -> dict[tuple[str, str], Fraction]:
        return {(z.id, p.id): z.capacity(p.x) for z in self.profiles for p in self.points}

    def cap(self, z: Profile, p: DemandPoint) -> Fraction:
        try:
            return self._caps[(z.id, p.id)]
        except KeyError:
            return z.capacity(p.x)

    def profile(self, pid: str) -> Profile:
        return self._by_id[pid]

    def to_json(self) -> dict:
        def num(x):
            return int(x) if x.denominator == 1 else str(x)

        return {
            "points": [{"id": p.id, "x": num(p.x), "demand": num(p.demand)} for p in self.points],
            "profiles": [z.to_json() for z in self.profiles],
        }


def capcover_from_dict(doc) -> CapCoverInstance:
    if not isinstance(doc, dict):
        raise InstanceError("malformed document: top level must be an object")
    points = []
    for k, rp in enumerate(doc.get("points", [])):
        try:
            points.append(DemandPoint(str(rp.get("id", f"p{k}")), frac(rp["x"]), frac(rp["demand"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"points[{k}]: {exc}") from None
    profiles = [profile_from_json(rz, f"profiles[{k}]") for k, rz in enumerate(doc.get("profiles", []))]
    # demand-0 points carry no constraint
    points = [p for p in points if p.demand != 0]
    return CapCoverInstance(tuple(points), tuple(profiles))


def parse_capcover(text: str) -> CapCoverInstance:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    return capcover_from_dict(doc)


# --- KC inequality ---------------------------------------------------------------


def kc_constraint(inst: CapCoverInstance, p: DemandPoint, S: Iterable[str], x: Mapping[str, Fraction]) -> Fraction:
    """Slack (LHS - RHS) of the KC inequality for ``(p, S)`` under ``x``.

    Raises ``ValueError`` when ``c_S(p) >= d_p``: the inequality is void.
    """
    S = set(S)
    cS = sum((inst.cap(z, p) for z in inst.profiles if z.id in S), Fraction(0))
    if cS >= p.demand:
        raise ValueError(f"KC inequality void at {p.id}: c_S(p)={cS} >= d_p={p.demand}")
    resid = p.demand - cS
    lhs = sum(
        (min(inst.cap(z, p), resid) * frac(x.get(z.id, 0)) for z in inst.profiles if z.id not in S),
        Fraction(0),
    )
    return lhs - resid


@dataclass
class FractionalSolution:
    x: dict[str, Fraction]
    costs: dict[str, Fraction]
    value_float: float = 0.0
    rounds: int = 0
    cuts: int = 0

    @property
    def objective(self) -> Fraction:
        return sum((self.costs[k] * v for k, v in self.x.items()), Fraction(0))


def snapshot(value: float) -> Fraction:
    """Float LP value -> exact rational at 12 decimals, clipped to [0, 1]."""
    q = Fraction(format(float(value), ".12f"))
    return min(max(q, Fraction(0)), Fraction(1))


def check_coverable(inst: CapCoverInstance) -> None:
    for p in inst.points:
        total = sum((inst.cap(z, p) for z in inst.profiles), Fraction(0))
        if total < p.demand:
            raise InfeasibleError(
                f"point {p.id} (x={p.x}) has demand {p.demand} but total capacity {total}", witness=p.id
            )


def _threshold_sets(x: Mapping[str, Fraction], beta) -> list[frozenset]:
    """Upper level sets ``{z : x_z >= theta}`` for every positive value of x,
    plus the heavy set at ``1/beta`` itself."""
    levels = sorted({v for v in x.values() if v > 0} | {Fraction(1) / frac(beta)}, reverse=True)
    out = []
    for theta in levels:
        S = frozenset(k for k, v in x.items() if v >= theta)
        if S not in out:
            out.append(S)
    return out


def _violated_threshold_cuts(inst, x, beta, tol, capm, ids):
    """Screen every upper-level-set cut in floats; confirm candidates exactly."""
    xs = np.array([float(x[k]) for k in ids])
    order = np.argsort(-xs, kind="stable")
    xo = xs[order]
    sets = _threshold_sets(x, beta)
    sizes = sorted({len(S) for S in sets})
    out = []
    for pi, p in enumerate(inst.points):
        co = capm[pi, order]
        prefix = np.concatenate([[0.0], np.cumsum(co)])
        d = float(p.demand)
        for k in sizes:
            resid = d - prefix[k]
            if resid <= 0:
                continue
            lhs = float(np.minimum(co[k:], resid) @ xo[k:])
            if lhs - resid >= -0.5 * tol * resid:
                continue
            S = frozenset(ids[i] for i in order[:k])
            cS = sum((inst.cap(inst.profile(z), p) for z in S), Fraction(0))
            if cS >= p.demand:
                continue
            if kc_constraint(inst, p, S, x) < -Fraction(tol) * (p.demand - cS):
                out.append((p, S))
    return out


def _kc_row(inst, p, S, index):
    cS = sum((inst.cap(z, p) for z in inst.profiles if z.id in S), Fraction(0))
    resid = p.demand - cS
    row = [0.0] * len(index)
    for z in inst.profiles:
        if z.id not in S:
            row[index[z.id]] = float(min(inst.cap(z, p), resid))
    return row, resid


def solve_kc_lp(
    inst: CapCoverInstance,
    beta=DEFAULT_BETA,
    tol: float = DEFAULT_TOL,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    separation: str = "threshold",
    exhaustive_cap: int = 1 << 14,
) -> FractionalSolution:
    """Cutting-plane solve of the KC-strengthened LP.

    ``separation="threshold"`` checks, for every point, the KC inequality of
    each upper level set of the current x (this includes the heavy set
    ``{x_z >= 1/beta}``). ``"exhaustive"`` adds every KC inequality up front
    and is only meant for small oracle instances.
    """
    if frac(beta) < 2:
        raise InstanceError("beta: must be >= 2")
    if frac(beta) < 8:
        warnings.warn("beta < 8 voids the lifted-cover guarantee", stacklevel=2)
    if tol <= 0:
        raise InstanceError("tol: must be > 0")
    check_coverable(inst)
    ids = [z.id for z in inst.profiles]
    costs = {z.id: z.cost for z in inst.profiles}
    index = {k: i for i, k in enumerate(ids)}
    if not inst.points or not ids:
        return FractionalSolution({k: Fraction(0) for k in ids}, costs)

    pool: dict[tuple[str, frozenset], tuple[list[float], Fraction]] = {}

    def add(p, S):
        key = (p.id, S)
        if key in pool:
            return False
        pool[key] = _kc_row(inst, p, S, index)
        return True

    if separation == "exhaustive":
        for p in inst.points:
            covering = [z.id for z in inst.profiles if inst.cap(z, p) > 0]
            if 2 ** len(covering) > exhaustive_cap:
                raise SizeLimitError(f"exhaustive KC separation at {p.id} needs 2^{len(covering)} sets")
            for r in range(len(covering) + 1):
                for S in itertools.combinations(covering, r):
                    S = frozenset(S)
                    cS = sum((inst.cap(inst.profile(k), p) for k in S), Fraction(0))
                    if cS < p.demand:
                        add(p, S)
    elif separation == "threshold":
        for p in inst.points:
            add(p, frozenset())
    else:
        raise InstanceError(f"separation: unknown mode {separation!r}")

    c = [float(costs[k]) for k in ids]
    capm = np.array([[float(inst.cap(z, p)) for z in inst.profiles] for p in inst.points])
    rounds = 0
    while True:
        rounds += 1
        rows = list(pool.values())
        res = solve_lp(c, [r for r, _ in rows], [float(d) for _, d in rows], ub=[1.0] * len(ids), feas_tol=tol)
        x = {k: snapshot(res.x[index[k]]) for k in ids}
        if separation == "exhaustive":
            break
        added = 0
        for p, S in _violated_threshold_cuts(inst, x, beta, tol, capm, ids):
            added += add(p, S)
        log.debug("KC round %d: %d new cuts", rounds, added)
        if not added:
            break
        if rounds >= max_rounds:
            raise RuntimeError(f"KC separation did not converge within {max_rounds} rounds")
    return FractionalSolution(x, costs, res.value, rounds, len(pool))


# --- heavy sets and residual demands ------------------------------------------------


@dataclass
class ResidualInstance:
    inst: CapCoverInstance
    beta: Fraction
    heavy: tuple[str, ...]
    residual: dict[str, Fraction]  # point id -> d'_p (only points with d'_p > 0)
    remaining: tuple[str, ...]  # Z' = Z \ S
    x_scaled: dict[str, Fraction]  # x'_z = beta * x_z on Z'
    x: dict[str, Fraction] = field(default_factory=dict)

    def points(self) -> list[DemandPoint]:
        return [p for p in self.inst.points if p.id in self.residual]

    @property
    def heavy_cost(self) -> Fraction:
        return sum((self.inst.profile(k).cost for k in self.heavy), Fraction(0))


def select_heavy(inst: CapCoverInstance, x: Mapping[str, Fraction], beta=DEFAULT_BETA) -> ResidualInstance:
    beta = frac(beta)
    x = {k: frac(v) for k, v in x.items()}
    heavy = tuple(z.id for z in inst.profiles if x.get(z.id, 0) >= 1 / beta)
    hs = set(heavy)
    residual = {}
    for p in inst.points:
        cS = sum((inst.cap(z, p) for z in inst.profiles if z.id in hs), Fraction(0))
        d = max(Fraction(0), p.demand - cS)
        if d > 0:
            residual[p.id] = d
    remaining = tuple(z.id for z in inst.profiles if z.id not in hs)
    x_scaled = {k: beta * x.get(k, Fraction(0)) for k in remaining}
    return ResidualInstance(inst, beta, heavy, residual, remaining, x_scaled, x)


def beta_cover_margin(res: ResidualInstance, p: DemandPoint) -> Fraction:
    d = res.residual[p.id]
    return sum(
        (min(res.inst.cap(res.inst.profile(k), p), d) * res.x_scaled[k] for k in res.remaining),
        Fraction(0),
    )


def verify_beta_cover(res: ResidualInstance, tol: float = DEFAULT_TOL) -> bool:
    """Residual demands covered ``beta`` times over by the scaled solution,
    up to relative tolerance ``tol``."""
    slack = 1 - Fraction(tol)
    for p in res.points():
        d = res.residual[p.id]
        if beta_cover_margin(res, p) < res.beta * d * slack:
            return False
    return True


def verify_capcover(inst: CapCoverInstance, selection: Iterable[str], demands: Mapping[str, Fraction] | None = None) -> bool:
    """Exact check that summed capacities meet every demand.

    ``selection`` is a multiset of profile ids; ``demands`` optionally
    overrides point demands by point id (points absent from it are skipped).
    """
    chosen = [inst.profile(k) for k in selection]
    for p in inst.points:
        d = p.demand if demands is None else demands.get(p.id)
        if d is None or d <= 0:
            continue
        if sum((inst.cap(z, p) for z in chosen), Fraction(0)) < d:
            return False
    return True


def brute_force_capcover(inst: CapCoverInstance, cap: int = 22):
    """Minimum-cost exact cover by depth-first branch and bound."""
    zs = sorted(inst.profiles, key=lambda z: (z.cost, z.id))
    if len(zs) > cap:
        raise SizeLimitError(f"{len(zs)} profiles exceeds brute-force cap {cap}")
    check_coverable(inst)
    caps = [[inst.cap(z, p) for p in inst.points] for z in zs]
    # suffix capacity sums for feasibility pruning
    suffix = [[Fraction(0)] * len(inst.points) for _ in range(len(zs) + 1)]
    for i in range(len(zs) - 1, -1, -1):
        suffix[i] = [a + b for a, b in zip(suffix[i + 1], caps[i])]
    demand = [p.demand for p in inst.points]
    best: list = [None, None]

    def dfs(i, cover, chosen, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if all(c >= d for c, d in zip(cover, demand)):
            best[0], best[1] = cost, list(chosen)
            return
        if i == len(zs):
            return
        if any(c + s < d for c, s, d in zip(cover, suffix[i], demand)):
            return
        chosen.append(zs[i].id)
        dfs(i + 1, [c + k for c, k in zip(cover, caps[i])], chosen, cost + zs[i].cost)
        chosen.pop()
        dfs(i + 1, cover, chosen, cost)

    dfs(0, [Fraction(0)] * len(inst.points), [], Fraction(0))
    return best[1], best[0]
