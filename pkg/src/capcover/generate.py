"""Seeded random instance generators for tests, suites and benchmarks."""
from __future__ import annotations

import random
from fractions import Fraction

from .gsp import GspInstance, Job, StepCurve
from .kclp import CapCoverInstance, DemandPoint
from .profiles import Profile, pwl, rect, triangle


def random_curve(rng: random.Random, horizon: int, max_breakpoints: int = 3) -> StepCurve:
    k = rng.randint(1, max_breakpoints)
    times = sorted(rng.sample(range(1, max(horizon, k) + 1), k - 1))
    value = Fraction(0) if rng.random() < 0.6 else Fraction(rng.randint(1, 4))
    bps = [(0, value)]
    for t in times:
        value += rng.randint(1, 12)
        bps.append((t, value))
    return StepCurve(tuple(bps))


def random_gsp(
    rng: random.Random,
    max_jobs: int = 5,
    max_machines: int = 3,
    max_size: int = 6,
    max_breakpoints: int = 3,
) -> GspInstance:
    n = rng.randint(1, max_jobs)
    m = rng.randint(1, max_machines)
    sizes = [rng.randint(1, max_size) for _ in range(n)]
    v = sum(sizes)
    jobs = tuple(
        Job(f"j{i + 1}", p, random_curve(rng, v, max_breakpoints)) for i, p in enumerate(sizes)
    )
    return GspInstance(m, jobs)


def random_deadlines(rng: random.Random, inst: GspInstance) -> dict[str, int]:
    v = inst.v
    out = {}
    for j in inst.jobs:
        if rng.random() < 0.15:
            out[j.id] = rng.randint(0, v)
        else:
            out[j.id] = rng.randint(min(j.size, v), v)
    return out


def _random_profile(rng: random.Random, pid: str, span: int) -> Profile:
    a = rng.randint(0, span - 1)
    b = rng.randint(a + 1, span)
    cost = Fraction(rng.randint(0, 10)) if rng.random() < 0.8 else Fraction(rng.randint(1, 40), 4)
    kind = rng.random()
    if kind < 0.45:
        return rect(pid, a, b, rng.randint(1, 8), cost)
    if kind < 0.85:
        slope = Fraction(rng.randint(1, 6), rng.randint(1, 3))
        return triangle(pid, a, b, cost, rising=rng.random() < 0.5, slope=slope)
    k = rng.randint(2, 4)
    xs = sorted(rng.sample(range(a, b + 1), min(k, b - a + 1)))
    if len(xs) < 2:
        xs = [a, b]
    return pwl(pid, [(x, rng.randint(0, 8)) for x in xs], cost)


def random_capcover(rng: random.Random, max_points: int = 8, max_profiles: int = 10, span: int = 20) -> CapCoverInstance:
    """Random instance that is coverable by the whole family."""
    n_pts = rng.randint(1, max_points)
    xs = sorted(rng.sample(range(span + 1), n_pts))
    points = []
    for i, x in enumerate(xs):
        d = Fraction(rng.randint(1, 12)) if rng.random() < 0.85 else Fraction(rng.randint(1, 30), 4)
        points.append(DemandPoint(f"p{i}", Fraction(x), d))
    n_prof = rng.randint(1, max_profiles)
    profiles = [_random_profile(rng, f"z{i}", span) for i in range(n_prof)]
    for p in points:
        have = sum((z.capacity(p.x) for z in profiles), Fraction(0))
        if have >= p.demand:
            continue
        if len(profiles) < max_profiles:
            # widen coverage with a new rectangle over this point
            lo = rng.randint(0, int(p.x))
            hi = rng.randint(int(p.x), span)
            profiles.append(rect(f"z{len(profiles)}", lo, hi, p.demand - have, rng.randint(1, 10)))
        else:
            # no room for another profile: widen the last one into a tall rectangle
            k = len(profiles) - 1
            z = profiles[k]
            profiles[k] = rect(z.id, min(z.a, p.x), max(z.b, p.x), p.demand + 1, z.cost)
    inst = CapCoverInstance(tuple(points), tuple(profiles))
    for p in inst.points:
        if sum((inst.cap(z, p) for z in inst.profiles), Fraction(0)) < p.demand:
            return random_capcover(rng, max_points, max_profiles, span)
    return inst


def knapsack_instance(sizes, costs, demand) -> CapCoverInstance:
    """Single demand point at 0 with one rectangle per item."""
    point = DemandPoint("p", Fraction(0), Fraction(demand))
    profiles = tuple(rect(f"i{k}", -1, 1, s, c) for k, (s, c) in enumerate(zip(sizes, costs)))
    return CapCoverInstance((point,), profiles)


def random_knapsack(rng: random.Random, max_items: int = 10) -> CapCoverInstance:
    while True:
        n = rng.randint(1, max_items)
        demand = rng.randint(1, 30)
        sizes = [rng.randint(1, demand) for _ in range(n)]
        if sum(sizes) < demand:
            continue
        costs = [rng.randint(0, 10) if rng.random() < 0.9 else Fraction(rng.randint(1, 20), 3) for _ in range(n)]
        return knapsack_instance(sizes, costs, demand)


def random_rectangles(rng: random.Random, t: int, span: int = 100) -> list[Profile]:
    out = []
    for i in range(t):
        a = rng.randint(0, span - 1)
        b = rng.randint(a + 1, span)
        out.append(rect(f"r{i:02d}", a, b, rng.randint(1, 20), 1))
    return out


def random_triangles(rng: random.Random, t: int, span: int = 100, rising: bool = True) -> list[Profile]:
    out = []
    for i in range(t):
        a = rng.randint(0, span - 1)
        b = rng.randint(a + 1, span)
        out.append(triangle(f"t{i:02d}", a, b, 1, rising=rising, slope=1))
    return out


def synthetic_residual(rng: random.Random, beta=8, max_points: int = 6, max_profiles: int = 20):
    """Residual instance with many light profiles and a random scaled vector.

    ``x'`` is drawn directly rather than from an LP, and each residual demand
    is halved until the scaled vector covers it ``beta`` times over, so the
    instance satisfies exactly the hypothesis the lifting relies on.
    """
    from .kclp import ResidualInstance

    beta = Fraction(beta)
    span = 12
    n_pts = rng.randint(1, max_points)
    xs = sorted(rng.sample(range(3, span - 2), n_pts))
    points = tuple(DemandPoint(f"p{i}", Fraction(x), Fraction(rng.randint(1, 40), rng.choice([1, 1, 2, 3]))) for i, x in enumerate(xs))
    profiles = []
    for i in range(rng.randint(max(2, max_profiles // 2), max_profiles)):
        # wide supports so that every point sees most of the family
        a, b = rng.randint(0, 4), rng.randint(span - 4, span)
        cost = Fraction(rng.randint(1, 10))
        if rng.random() < 0.5:
            profiles.append(rect(f"z{i}", a, b, Fraction(rng.randint(1, 24), rng.choice([1, 2, 4])), cost))
        else:
            slope = Fraction(rng.randint(1, 8), rng.randint(1, 4))
            profiles.append(triangle(f"z{i}", a, b, cost, rising=rng.random() < 0.5, slope=slope))
    inst = CapCoverInstance(points, tuple(profiles))
    ids = [z.id for z in inst.profiles]
    x_scaled = {k: Fraction(rng.randint(30, 100), 100) if rng.random() < 0.9 else Fraction(0) for k in ids}
    residual = {}
    for p in inst.points:
        d = p.demand
        while d > Fraction(1, 64):
            mass = sum((min(inst.cap(z, p), d) * x_scaled[z.id] for z in inst.profiles), Fraction(0))
            if mass >= beta * d:
                residual[p.id] = d
                break
            d /= 2
    x = {k: v / beta for k, v in x_scaled.items()}
    return ResidualInstance(inst, beta, (), residual, tuple(ids), x_scaled, x)
