"""End-to-end run: scheduling instance -> cover -> deadlines -> schedule.

When no cost guess is supplied the run is repeated with a doubling guess,
starting from the smallest positive cost, until the deadlines it produces
cost at most ``guess * guess_factor`` (or the guess passes the cost of
finishing every job at the horizon, after which larger guesses change
nothing).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    InfeasibleError,
    InstanceError,
    InternalConsistencyError,
    SizeLimitError,
    StageError,
)
from .geomcover import (
    DEFAULT_EXACT_CAP,
    exact_multicover,
    greedy_multicover,
    setcover_lp,
)
from .gsp import (
    DEFAULT_FLOW_CAP,
    CandidateDeadlines,
    GspInstance,
    Schedule,
    brute_force_gsp,
    check_feasible,
    extract_schedule,
    gsp_cost,
    min_positive_cost,
    preprocess,
    verify_schedule,
)
from .kclp import (
    DEFAULT_BETA,
    DEFAULT_MAX_ROUNDS,
    DEFAULT_TOL,
    CapCoverInstance,
    select_heavy,
    solve_kc_lp,
    verify_beta_cover,
    verify_capcover,
)
from .lift import CoverLedger, build_lifted, compose_final, induced_fractional, map_back
from .profiles import frac
from .trcgen import build_trc, cover_to_deadlines

log = logging.getLogger(__name__)

GUESS_FACTOR = 108
ROUNDING_MODES = ("auto", "greedy", "exact")


def exact_and_decimal(x: Fraction | None, places: int = 9):
    if x is None:
        return None
    x = Fraction(x)
    return {"exact": str(x), "decimal": f"{float(x):.{places}f}"}


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (InfeasibleError, InternalConsistencyError, SizeLimitError, ArithmeticError, RuntimeError, ValueError) as exc:
        raise StageError(name, exc) from exc


@dataclass
class CoverRun:
    """Everything the capacitated-cover half of the pipeline produced."""

    ledger: CoverLedger
    rounding: str
    lp_rounds: int
    lp_cuts: int
    lifted_elements: int
    lifted_sets: int
    flags: dict[str, bool]


def solve_capcover(
    inst: CapCoverInstance,
    beta=DEFAULT_BETA,
    tol: float = DEFAULT_TOL,
    rounding: str = "auto",
    max_cut_rounds: int = DEFAULT_MAX_ROUNDS,
    exact_cap: int = DEFAULT_EXACT_CAP,
) -> CoverRun:
    if rounding not in ROUNDING_MODES:
        raise InstanceError(f"rounding: expected one of {ROUNDING_MODES}, got {rounding!r}")
    frac_sol = _stage("solve_kc_lp", solve_kc_lp, inst, beta, tol, max_cut_rounds)
    w_star = frac_sol.objective
    res = _stage("select_heavy", select_heavy, inst, frac_sol.x, beta)
    beta_ok = verify_beta_cover(res, tol)
    if not beta_ok:
        raise StageError("select_heavy", InternalConsistencyError("scaled LP solution misses a residual demand"))
    lifted = _stage("build_lifted", build_lifted, res)
    if lifted.uncovered_points:
        raise StageError(
            "build_lifted",
            InternalConsistencyError(f"no residual profile reaches points {lifted.uncovered_points}"),
        )
    induced = _stage("induced_fractional", induced_fractional, lifted)
    sc = lifted.to_setcover()
    backend = rounding
    if backend == "auto":
        backend = "exact" if len(sc.sets) <= exact_cap else "greedy"
    if not sc.elements:
        selection, lp_value = (), Fraction(0)
    else:
        cover = _stage("round", exact_multicover if backend == "exact" else greedy_multicover, sc)
        selection = cover.selected
        lp_value = Fraction(_stage("setcover_lp", setcover_lp, sc).value)
    mb = _stage("map_back", map_back, lifted, selection)
    if not mb.verdict:
        raise StageError("map_back", InternalConsistencyError("mapped-back cover misses a residual demand"))
    ledger = _stage("compose_final", compose_final, res, mb.selection, w_star, lp_value, induced)
    flags = {
        "beta_cover": beta_ok,
        "induced_feasible": True,
        "map_back": mb.verdict,
        "capcover": verify_capcover(inst, ledger.selection),
        "ledger_identity": ledger.within_bound,
    }
    return CoverRun(ledger, backend, frac_sol.rounds, frac_sol.cuts, len(sc.elements), len(sc.sets), flags)


@dataclass
class PipelineLedger:
    opt_guess: Fraction
    guesses: list[Fraction]
    candidates: CandidateDeadlines
    points: int
    profiles: int
    cover: CoverRun
    deadlines: dict[str, int]
    final_cost: Fraction  # deadlines priced on the rounded candidate costs
    final_cost_original: Fraction  # same deadlines priced on the input curves
    flags: dict[str, bool] = field(default_factory=dict)
    brute_force_opt: Fraction | None = None

    @property
    def gamma(self) -> Fraction:
        return self.cover.ledger.gamma

    @property
    def headline_bound(self) -> Fraction | None:
        """``GUESS_FACTOR * gamma * OPT`` when the grid optimum is known."""
        if self.brute_force_opt is None:
            return None
        return GUESS_FACTOR * self.gamma * self.brute_force_opt

    @property
    def ok(self) -> bool:
        return all(self.flags.values())

    def to_json(self) -> dict:
        led = self.cover.ledger
        cands = [
            {"job": jc.job, "deadlines": list(jc.deadlines), "costs": [str(c) for c in jc.costs]}
            for jc in self.candidates.jobs
        ]
        ratio = None
        if self.brute_force_opt:
            ratio = exact_and_decimal(self.final_cost / self.brute_force_opt)
        return {
            "opt_guess": exact_and_decimal(self.opt_guess),
            "guesses": [str(g) for g in self.guesses],
            "candidates": cands,
            "trc": {"points": self.points, "profiles": self.profiles},
            "beta": str(led.beta),
            "rounding": self.cover.rounding,
            "lp_rounds": self.cover.lp_rounds,
            "lp_cuts": self.cover.lp_cuts,
            "lifted": {"elements": self.cover.lifted_elements, "sets": self.cover.lifted_sets},
            "w_star": exact_and_decimal(led.w_star),
            "heavy_cost": exact_and_decimal(led.heavy_cost),
            "lifted_lp_value": exact_and_decimal(led.lifted_lp_value),
            "rounded_cost": exact_and_decimal(led.rounded_cost),
            "gamma": exact_and_decimal(led.gamma),
            "cover_cost": exact_and_decimal(led.total),
            "cover_bound": exact_and_decimal(led.bound),
            "selection": list(led.selection),
            "deadlines": self.deadlines,
            "final_cost": exact_and_decimal(self.final_cost),
            "final_cost_original": exact_and_decimal(self.final_cost_original),
            "brute_force_opt": exact_and_decimal(self.brute_force_opt),
            "ratio_to_opt": ratio,
            "headline_bound": exact_and_decimal(self.headline_bound),
            "flags": self.flags,
        }


@dataclass
class PipelineResult:
    ledger: PipelineLedger
    schedule: Schedule | None


def _run_once(inst, guess, beta, tol, rounding, max_cut_rounds, exact_cap):
    cands = _stage("preprocess", preprocess, inst, guess)
    trc = _stage("build_trc", build_trc, inst, cands)
    cover = solve_capcover(trc, beta, tol, rounding, max_cut_rounds, exact_cap)
    chosen = [trc.profile(k) for k in cover.ledger.selection]
    deadlines = _stage("cover_to_deadlines", cover_to_deadlines, chosen, cands)
    return cands, trc, cover, deadlines


def run_pipeline(
    inst: GspInstance,
    beta=DEFAULT_BETA,
    tol: float = DEFAULT_TOL,
    rounding: str = "auto",
    opt_guess=None,
    max_cut_rounds: int = DEFAULT_MAX_ROUNDS,
    guess_factor=GUESS_FACTOR,
    schedule_cap: int = DEFAULT_FLOW_CAP,
    exact_cap: int = DEFAULT_EXACT_CAP,
    oracle: bool = False,
) -> PipelineResult:
    if opt_guess is not None:
        guesses = [frac(opt_guess)]
        if guesses[0] <= 0:
            raise InstanceError("opt_guess: must be > 0")
    else:
        low = min_positive_cost(inst)
        guesses = [low if low is not None else Fraction(1)]
    ceiling = sum((j.cost_curve(inst.v) for j in inst.jobs), Fraction(0))
    tried = []
    while True:
        guess = guesses[-1]
        tried.append(guess)
        cands, trc, cover, deadlines = _run_once(inst, guess, beta, tol, rounding, max_cut_rounds, exact_cap)
        final = cands.cost(deadlines)
        log.debug("guess %s: final cost %s", guess, final)
        if opt_guess is not None or final <= guess * guess_factor or guess >= ceiling:
            break
        guesses.append(guess * 2)

    feasible = _stage("check_feasible", check_feasible, deadlines, inst)
    if not feasible:
        raise StageError("check_feasible", InternalConsistencyError(f"deadlines {deadlines} are infeasible"))
    schedule = None
    flags = dict(cover.flags)
    flags["deadlines_feasible"] = feasible
    if inst.v <= schedule_cap:
        schedule = _stage("extract_schedule", extract_schedule, deadlines, inst, schedule_cap)
        flags["schedule_valid"] = not verify_schedule(schedule, inst, deadlines)
    ledger = PipelineLedger(
        opt_guess=tried[-1],
        guesses=tried,
        candidates=cands,
        points=len(trc.points),
        profiles=len(trc.profiles),
        cover=cover,
        deadlines=deadlines,
        final_cost=final,
        final_cost_original=gsp_cost(inst, deadlines),
        flags=flags,
    )
    if oracle:
        _, opt = _stage("oracle", brute_force_gsp, inst, cands)
        ledger.brute_force_opt = opt
        flags["headline_ratio"] = final <= ledger.headline_bound
    return PipelineResult(ledger, schedule)
