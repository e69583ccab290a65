"""General scheduling: jobs released at time 0, preemptive with migration, on
``m`` identical machines, minimising the sum of non-decreasing completion-time
costs.

Time is slotted; slot ``t`` is the interval ``(t-1, t]`` and deadlines are
integers in ``[0, v]`` with ``v = sum of sizes``. All arithmetic here is exact.
"""
from __future__ import annotations

import itertools
import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .errors import InfeasibleError, InstanceError, SizeLimitError
from .profiles import frac

DEFAULT_FLOW_CAP = 10_000
DEFAULT_ENUM_CAP = 10 ** 6


@dataclass(frozen=True)
class StepCurve:
    """Right-continuous step function: ``f(t)`` is the value of the last
    breakpoint with time <= t. The first breakpoint sits at time 0."""

    breakpoints: tuple[tuple[int, Fraction], ...]

    def __call__(self, t: int) -> Fraction:
        value = self.breakpoints[0][1]
        for time, val in self.breakpoints:
            if time > t:
                break
            value = val
        return value

    def values_on(self, lo: int, hi: int) -> list[tuple[int, Fraction]]:
        """Breakpoints restricted to ``[lo, hi]``, with ``lo`` always present."""
        out = [(lo, self(lo))]
        out.extend((t, val) for t, val in self.breakpoints if lo < t <= hi)
        return out

    @classmethod
    def constant(cls, value=0) -> StepCurve:
        return cls(((0, frac(value)),))


@dataclass(frozen=True)
class Job:
    id: str
    size: int
    cost_curve: StepCurve


@dataclass(frozen=True)
class GspInstance:
    machines: int
    jobs: tuple[Job, ...]

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def v(self) -> int:
        return sum(j.size for j in self.jobs)

    def job(self, job_id: str) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)

    def to_json(self) -> dict:
        def num(x):
            return int(x) if x.denominator == 1 else str(x)

        return {
            "machines": self.machines,
            "jobs": [
                {"id": j.id, "size": j.size, "cost": [[t, num(val)] for t, val in j.cost_curve.breakpoints]}
                for j in self.jobs
            ],
        }


def make_instance(machines: int, jobs) -> GspInstance:
    """Build and validate from ``(id, size, [(t, value), ...])`` triples."""
    return gsp_from_dict(
        {"machines": machines, "jobs": [{"id": i, "size": p, "cost": list(c)} for i, p, c in jobs]}
    )


def parse_gsp(text: str) -> GspInstance:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    return gsp_from_dict(doc)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def gsp_from_dict(doc) -> GspInstance:
    if not isinstance(doc, dict):
        raise InstanceError("malformed document: top level must be an object")
    m = doc.get("machines")
    if not _is_int(m):
        raise InstanceError("machines: must be an integer")
    if m < 1:
        raise InstanceError("machines: machines must be ≥ 1")
    raw_jobs = doc.get("jobs")
    if not isinstance(raw_jobs, list) or not raw_jobs:
        raise InstanceError("jobs: must be a non-empty list")
    jobs = []
    seen = set()
    for k, rj in enumerate(raw_jobs):
        where = f"jobs[{k}]"
        if not isinstance(rj, dict):
            raise InstanceError(f"{where}: must be an object")
        if "id" not in rj:
            raise InstanceError(f"{where}.id: missing")
        jid = str(rj["id"])
        if jid in seen:
            raise InstanceError(f"{where}.id: duplicate job id {jid!r}")
        seen.add(jid)
        size = rj.get("size")
        if not _is_int(size):
            raise InstanceError(f"{where}.size: must be an integer")
        if size <= 0:
            raise InstanceError(f"{where}.size: size must be ≥ 1")
        jobs.append(Job(jid, size, _parse_curve(rj.get("cost"), f"{where}.cost")))
    return GspInstance(m, tuple(jobs))


def _parse_curve(raw, where) -> StepCurve:
    if raw is None:
        return StepCurve.constant(0)
    if not isinstance(raw, list) or not raw:
        raise InstanceError(f"{where}: must be a non-empty list of [time, value]")
    bps = []
    for k, item in enumerate(raw):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise InstanceError(f"{where}[{k}]: expected [time, value]")
        t, val = item
        if not _is_int(t) or t < 0:
            raise InstanceError(f"{where}[{k}]: time must be a non-negative integer")
        try:
            val = frac(val)
        except (TypeError, ValueError, ZeroDivisionError):
            raise InstanceError(f"{where}[{k}]: value must be a number") from None
        if val < 0:
            raise InstanceError(f"{where}[{k}]: value must be non-negative")
        bps.append((t, val))
    if bps[0][0] != 0:
        raise InstanceError(f"{where}: first breakpoint must be at time 0")
    for k in range(1, len(bps)):
        if bps[k][0] <= bps[k - 1][0]:
            raise InstanceError(f"{where}[{k}]: times must be strictly increasing")
        if bps[k][1] < bps[k - 1][1]:
            raise InstanceError(f"{where}[{k}]: non-monotone curve")
    return StepCurve(tuple(bps))


# --- preprocessing -----------------------------------------------------------


@dataclass(frozen=True)
class JobCandidates:
    job: str
    size: int
    deadlines: tuple[int, ...]
    costs: tuple[Fraction, ...]

    @property
    def k(self) -> int:
        return len(self.deadlines) - 1

    def cost_of(self, deadline: int) -> Fraction:
        return self.costs[self.deadlines.index(deadline)]


@dataclass(frozen=True)
class CandidateDeadlines:
    v: int
    opt_guess: Fraction
    jobs: tuple[JobCandidates, ...]

    def __getitem__(self, job_id: str) -> JobCandidates:
        for jc in self.jobs:
            if jc.job == job_id:
                return jc
        raise KeyError(job_id)

    def grid_size(self) -> int:
        out = 1
        for jc in self.jobs:
            out *= len(jc.deadlines)
        return out

    def cost(self, deadlines: Mapping[str, int]) -> Fraction:
        return sum((self[j].cost_of(c) for j, c in deadlines.items()), Fraction(0))


def round_cost(value: Fraction, threshold: Fraction) -> Fraction:
    """Drop to 0 when ``value <= threshold``, else round up to a power of two."""
    if value <= threshold:
        return Fraction(0)
    power = Fraction(1)
    while power < value:
        power *= 2
    while power / 2 >= value:
        power /= 2
    return power


def preprocess(inst: GspInstance, opt_guess) -> CandidateDeadlines:
    """Candidate deadlines from costs rounded against ``opt_guess``.

    ``c_0`` is the latest time in ``[0, v]`` with rounded cost 0 (0 when even
    ``f(0)`` survives rounding); each further candidate is the latest time at
    which the rounded curve sits at one of its power-of-two levels.
    """
    opt_guess = frac(opt_guess)
    if opt_guess <= 0:
        raise InstanceError("opt_guess: must be > 0")
    v = inst.v
    threshold = opt_guess / inst.n
    out = []
    for job in inst.jobs:
        steps = job.cost_curve.values_on(0, v)
        rounded = [(t, round_cost(val, threshold)) for t, val in steps]
        latest: dict[Fraction, int] = {}
        for idx, (t, level) in enumerate(rounded):
            end = rounded[idx + 1][0] - 1 if idx + 1 < len(rounded) else v
            latest[level] = end
        deadlines = [latest.pop(Fraction(0), 0)]
        costs = [Fraction(0)]
        for level in sorted(latest):
            if latest[level] <= deadlines[0]:
                # only when f(0) > 0: a level ending at time 0 duplicates c_0 = 0
                continue
            deadlines.append(latest[level])
            costs.append(level)
        out.append(JobCandidates(job.id, job.size, tuple(deadlines), tuple(costs)))
    return CandidateDeadlines(v, opt_guess, tuple(out))


def min_positive_cost(inst: GspInstance) -> Fraction | None:
    v = inst.v
    vals = [val for j in inst.jobs for _, val in j.cost_curve.values_on(0, v) if val > 0]
    return min(vals) if vals else None


def gsp_cost(inst: GspInstance, deadlines: Mapping[str, int]) -> Fraction:
    return sum((inst.job(j).cost_curve(c) for j, c in deadlines.items()), Fraction(0))


# --- feasibility ---------------------------------------------------------------


def _check_range(deadlines: Mapping[str, int], inst: GspInstance):
    v = inst.v
    ids = {j.id for j in inst.jobs}
    if set(deadlines) != ids:
        raise InstanceError("deadlines: must assign exactly one deadline per job")
    for jid, c in deadlines.items():
        if not _is_int(c) or not 0 <= c <= v:
            raise InstanceError(f"deadlines[{jid!r}]: {c!r} outside [0, {v}]")


def feasibility_slack(deadlines: Mapping[str, int], inst: GspInstance, b: int) -> int:
    """LHS minus RHS of the cut condition at time ``b``."""
    lhs = sum(min(j.size, max(deadlines[j.id] - b, 0)) for j in inst.jobs)
    return lhs - (inst.v - inst.machines * b)


def check_feasible(deadlines: Mapping[str, int], inst: GspInstance) -> bool:
    """Cut condition, evaluated only where its slack can change slope."""
    _check_range(deadlines, inst)
    v = inst.v
    points = {0, v}
    for j in inst.jobs:
        c = deadlines[j.id]
        points.add(c)
        if c >= j.size:
            points.add(c - j.size)
    return all(feasibility_slack(deadlines, inst, b) >= 0 for b in points)


@dataclass
class FlowResult:
    feasible: bool
    value: int
    slots: dict[str, list[int]] = field(default_factory=dict)


def _flow_network(deadlines, inst):
    g = nx.DiGraph()
    for j in inst.jobs:
        g.add_edge("s", ("job", j.id), capacity=j.size)
        for t in range(1, deadlines[j.id] + 1):
            g.add_edge(("job", j.id), ("slot", t), capacity=1)
    for t in range(1, inst.v + 1):
        g.add_edge(("slot", t), "t", capacity=inst.machines)
    return g


def max_flow_feasible(deadlines: Mapping[str, int], inst: GspInstance, cap: int = DEFAULT_FLOW_CAP) -> FlowResult:
    """Source -> job (size), job -> slots ``1..c_j`` (1 each), slot -> sink (m)."""
    _check_range(deadlines, inst)
    if inst.v > cap:
        raise SizeLimitError(
            f"v={inst.v} exceeds flow-network cap {cap}; use check_feasible instead"
        )
    g = _flow_network(deadlines, inst)
    value, flow = nx.maximum_flow(g, "s", "t", flow_func=nx.algorithms.flow.edmonds_karp)
    slots = {}
    for j in inst.jobs:
        out = flow.get(("job", j.id), {})
        slots[j.id] = sorted(node[1] for node, f in out.items() if f > 0)
    return FlowResult(value == inst.v, int(value), slots)


@dataclass
class Schedule:
    machines: int
    v: int
    cells: dict[tuple[int, int], str]

    def to_json(self) -> dict:
        return {"slots": [[t, mach, jid] for (t, mach), jid in sorted(self.cells.items())]}

    def completion_times(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for (t, _), jid in self.cells.items():
            out[jid] = max(out.get(jid, 0), t)
        return out


def extract_schedule(deadlines: Mapping[str, int], inst: GspInstance, cap: int = DEFAULT_FLOW_CAP) -> Schedule:
    res = max_flow_feasible(deadlines, inst, cap)
    if not res.feasible:
        raise InfeasibleError(f"deadlines infeasible: max flow {res.value} < {inst.v}")
    used: dict[int, int] = {}
    cells = {}
    for j in inst.jobs:
        for t in res.slots[j.id]:
            used[t] = used.get(t, 0) + 1
            cells[(t, used[t])] = j.id
    return Schedule(inst.machines, inst.v, cells)


def verify_schedule(schedule: Schedule, inst: GspInstance, deadlines: Mapping[str, int] | None = None) -> list[str]:
    """Return a list of invariant violations; empty means valid."""
    problems = []
    count: dict[str, int] = {}
    per_slot: dict[tuple[int, str], int] = {}
    for (t, mach), jid in schedule.cells.items():
        if not 1 <= t <= inst.v:
            problems.append(f"slot {t} outside [1, {inst.v}]")
        if not 1 <= mach <= inst.machines:
            problems.append(f"machine {mach} outside [1, {inst.machines}]")
        count[jid] = count.get(jid, 0) + 1
        per_slot[(t, jid)] = per_slot.get((t, jid), 0) + 1
    for (t, jid), k in per_slot.items():
        if k > 1:
            problems.append(f"job {jid} on {k} machines in slot {t}")
    done = schedule.completion_times()
    for j in inst.jobs:
        if count.get(j.id, 0) != j.size:
            problems.append(f"job {j.id} gets {count.get(j.id, 0)} cells, needs {j.size}")
        if deadlines is not None and done.get(j.id, 0) > deadlines[j.id]:
            problems.append(f"job {j.id} completes at {done[j.id]} after deadline {deadlines[j.id]}")
    return problems


# --- oracles -------------------------------------------------------------------


def brute_force_gsp(inst: GspInstance, candidates: CandidateDeadlines, cap: int = DEFAULT_ENUM_CAP):
    """Cheapest feasible assignment on the candidate grid (candidate costs)."""
    if candidates.grid_size() > cap:
        raise SizeLimitError(f"candidate grid has {candidates.grid_size()} assignments > cap {cap}")
    best = None
    ids = [jc.job for jc in candidates.jobs]
    options = [list(zip(jc.deadlines, jc.costs)) for jc in candidates.jobs]
    for combo in itertools.product(*options):
        cost = sum((c for _, c in combo), Fraction(0))
        if best is not None and cost >= best[1]:
            continue
        dl = dict(zip(ids, (d for d, _ in combo)))
        if check_feasible(dl, inst):
            best = (dl, cost)
    if best is None:
        raise InfeasibleError("no feasible assignment on the candidate grid")
    return best


def exact_gsp_optimum(inst: GspInstance, cap: int = DEFAULT_ENUM_CAP):
    """True optimum under the original cost curves.

    Per job only the latest time of each cost level in ``[p_j, v]`` matters:
    moving a deadline later at equal cost never hurts feasibility.
    """
    v = inst.v
    options = []
    total = 1
    for j in inst.jobs:
        latest: dict[Fraction, int] = {}
        steps = j.cost_curve.values_on(j.size, v)
        for idx, (t, val) in enumerate(steps):
            end = steps[idx + 1][0] - 1 if idx + 1 < len(steps) else v
            latest[val] = end
        opts = sorted((c, val) for val, c in latest.items())
        options.append(opts)
        total *= len(opts)
    if total > cap:
        raise SizeLimitError(f"deadline grid has {total} assignments > cap {cap}")
    ids = [j.id for j in inst.jobs]
    best = None
    for combo in itertools.product(*options):
        cost = sum((val for _, val in combo), Fraction(0))
        if best is not None and cost >= best[1]:
            continue
        dl = dict(zip(ids, (c for c, _ in combo)))
        if check_feasible(dl, inst):
            best = (dl, cost)
    assert best is not None, "deadline v for every job is always feasible"
    return best
