"""Command-line entry point.

Exit codes: 0 ok, 2 invalid input, 3 stage failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import random
import sys
import time
from contextlib import nullcontext
from fractions import Fraction
from pathlib import Path

from .envelope import upper_envelope
from .errors import InfeasibleError, InstanceError, SizeLimitError, StageError
from .generate import random_gsp
from .geomcover import (
    DEFAULT_EXACT_CAP,
    exact_multicover,
    greedy_multicover,
    setcover_from_dict,
    setcover_lp,
)
from .gsp import (
    brute_force_gsp,
    exact_gsp_optimum,
    gsp_from_dict,
    min_positive_cost,
    preprocess,
)
from .kclp import (
    DEFAULT_BETA,
    DEFAULT_MAX_ROUNDS,
    DEFAULT_TOL,
    brute_force_capcover,
    capcover_from_dict,
    select_heavy,
    solve_kc_lp,
    verify_beta_cover,
)
from .lift import build_lifted, induced_fractional, measured_gamma
from .pipeline import exact_and_decimal, run_pipeline
from .profiles import frac, profile_from_json
from .suites import SUITES, run_suites
from .trcgen import build_trc

EXIT_OK, EXIT_INPUT, EXIT_STAGE, EXIT_VERIFY = 0, 2, 3, 4


class VerificationFailed(Exception):
    pass


def _load(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: malformed JSON: {exc}") from None


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else str(x)


def _emit(doc: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump(doc, out, indent=2, sort_keys=False)
        out.write("\n")
        return
    for key, val in doc.items():
        if isinstance(val, dict) and set(val) == {"exact", "decimal"}:
            val = f"{val['exact']} ({val['decimal']})"
        elif isinstance(val, (dict, list)):
            val = json.dumps(val)
        out.write(f"{key}: {val}\n")


def _default_guess(inst, given):
    if given is not None:
        return frac(given)
    low = min_positive_cost(inst)
    return low if low is not None else Fraction(1)


# --- subcommands ---------------------------------------------------------------------


def cmd_run(args) -> dict:
    inst = gsp_from_dict(_load(args.input))
    result = run_pipeline(
        inst,
        beta=args.beta,
        tol=args.tol,
        rounding=args.rounding,
        opt_guess=args.opt_guess,
        max_cut_rounds=args.max_cut_rounds,
        oracle=args.oracle,
    )
    doc = result.ledger.to_json()
    if result.schedule is not None:
        doc["schedule"] = result.schedule.to_json()
    if not result.ledger.ok:
        _emit(doc, args.report)
        raise VerificationFailed("pipeline flags: " + ", ".join(k for k, v in result.ledger.flags.items() if not v))
    return doc


def cmd_reduce(args) -> dict:
    inst = gsp_from_dict(_load(args.input))
    cands = preprocess(inst, _default_guess(inst, args.opt_guess))
    return build_trc(inst, cands).to_json()


def _solve(doc, args):
    inst = capcover_from_dict(doc)
    try:
        sol = solve_kc_lp(inst, args.beta, args.tol, args.max_cut_rounds)
    except (InfeasibleError, RuntimeError, ArithmeticError) as exc:
        raise StageError("solve_kc_lp", exc) from exc
    return inst, sol


def cmd_lp(args) -> dict:
    inst, sol = _solve(_load(args.input), args)
    res = select_heavy(inst, sol.x, args.beta)
    return {
        "x": {k: str(v) for k, v in sol.x.items()},
        "w_star": exact_and_decimal(sol.objective),
        "rounds": sol.rounds,
        "cuts": sol.cuts,
        "heavy": list(res.heavy),
        "residual": {k: _num(v) for k, v in res.residual.items()},
        "beta_cover": verify_beta_cover(res, args.tol),
    }


def cmd_lift(args) -> dict:
    inst, sol = _solve(_load(args.input), args)
    res = select_heavy(inst, sol.x, args.beta)
    lifted = build_lifted(res)
    try:
        induced = induced_fractional(lifted)
    except AssertionError as exc:
        raise StageError("induced_fractional", exc) from exc
    doc = lifted.to_setcover().to_json()
    doc["heavy"] = list(res.heavy)
    doc["w_star"] = exact_and_decimal(sol.objective)
    doc["induced_objective"] = exact_and_decimal(induced.objective)
    doc["uncovered_points"] = lifted.uncovered_points
    return doc


def cmd_round(args) -> dict:
    inst = setcover_from_dict(_load(args.input))
    backend = args.rounding
    if backend == "auto":
        backend = "exact" if len(inst.sets) <= DEFAULT_EXACT_CAP else "greedy"
    try:
        cover = exact_multicover(inst) if backend == "exact" else greedy_multicover(inst)
        lp = setcover_lp(inst) if inst.elements else None
    except (InfeasibleError, SizeLimitError) as exc:
        raise StageError("round", exc) from exc
    lp_value = Fraction(lp.value) if lp else Fraction(0)
    doc = cover.to_json()
    doc["rounding"] = backend
    doc["lp_value"] = exact_and_decimal(lp_value)
    doc["gamma"] = exact_and_decimal(measured_gamma(cover.cost, lp_value)) if lp_value > 0 or cover.cost == 0 else None
    return doc


def cmd_verify(args) -> dict:
    names = list(SUITES)
    if args.claims:
        names = ["claims", "claims_dense"]
    elif args.suite:
        names = args.suite
    results = run_suites(names, args.seeds)
    doc = {"suites": [r.to_json() for r in results], "violations": sum(r.violations for r in results)}
    if doc["violations"]:
        _emit(doc, args.report)
        raise VerificationFailed(f"{doc['violations']} violations")
    return doc


def cmd_envelope(args) -> dict:
    doc = _load(args.input)
    raw = doc.get("profiles", []) if isinstance(doc, dict) else doc
    profiles = [profile_from_json(rz, f"profiles[{k}]") for k, rz in enumerate(raw)]
    report = upper_envelope(profiles, args.order)
    out = report.to_json()
    out["sequence"] = "".join(report.sequence) if all(len(s) == 1 for s in report.sequence) else report.sequence
    return out


def cmd_oracle(args) -> dict:
    doc = _load(args.input)
    if isinstance(doc, dict) and "machines" in doc:
        inst = gsp_from_dict(doc)
        cands = preprocess(inst, _default_guess(inst, args.opt_guess))
        dl, cost = brute_force_gsp(inst, cands)
        exact_dl, exact_cost = exact_gsp_optimum(inst)
        return {
            "grid_deadlines": dl,
            "grid_cost": exact_and_decimal(cost),
            "deadlines": exact_dl,
            "cost": exact_and_decimal(exact_cost),
        }
    if isinstance(doc, dict) and "elements" in doc:
        inst = setcover_from_dict(doc)
        cover = exact_multicover(inst)
        return cover.to_json()
    inst = capcover_from_dict(doc)
    sel, cost = brute_force_capcover(inst)
    if sel is None:
        raise StageError("oracle", InfeasibleError("no cover exists"))
    return {"selected": sel, "cost": exact_and_decimal(cost)}


BENCH_FIELDS = ["seed", "n", "m", "v", "opt", "final", "gamma", "ratio", "bound", "w_star", "guesses", "seconds"]


def cmd_bench(args) -> dict | None:
    sink = open(args.out, "w", newline="") if args.out else nullcontext(sys.stdout)  # noqa: SIM115
    with sink as out:
        _bench_rows(args, csv.DictWriter(out, fieldnames=BENCH_FIELDS))
    return None


def _bench_rows(args, writer) -> None:
    writer.writeheader()
    for s in range(args.seed, args.seed + args.seeds):
        inst = random_gsp(random.Random(s), args.max_jobs, args.max_machines, args.max_size)
        t0 = time.perf_counter()
        led = run_pipeline(inst, beta=args.beta, tol=args.tol, rounding=args.rounding, oracle=True).ledger
        dt = time.perf_counter() - t0
        opt = led.brute_force_opt
        writer.writerow(
            {
                "seed": s,
                "n": inst.n,
                "m": inst.machines,
                "v": inst.v,
                "opt": float(opt),
                "final": float(led.final_cost),
                "gamma": float(led.gamma),
                "ratio": float(led.final_cost / opt) if opt else "",
                "bound": float(led.headline_bound),
                "w_star": float(led.cover.ledger.w_star),
                "guesses": len(led.guesses),
                "seconds": f"{dt:.4f}",
            }
        )


# --- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=Fraction, default=Fraction(DEFAULT_BETA), help="heavy-set threshold 1/beta (default 8)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="LP feasibility tolerance")
    common.add_argument("--rounding", choices=["auto", "greedy", "exact"], default="auto")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--opt-guess", type=Fraction, default=None, help="fixed cost guess (skips doubling search)")
    common.add_argument("--max-cut-rounds", type=int, default=DEFAULT_MAX_ROUNDS)
    common.add_argument("--report", choices=["json", "text"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="capcover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, input_=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        if input_:
            p.add_argument("input", help="JSON document path, or - for stdin")
        p.set_defaults(func=fn)
        return p

    p = add("run", cmd_run, "full pipeline on a scheduling instance")
    p.add_argument("--oracle", action="store_true", help="also compute the candidate-grid optimum")
    add("reduce", cmd_reduce, "scheduling instance -> rectangle/triangle cover instance")
    add("lp", cmd_lp, "solve the knapsack-cover LP of a cover instance")
    add("lift", cmd_lift, "emit the lifted multi-cover instance")
    add("round", cmd_round, "round a multi-cover instance")
    p = add("verify", cmd_verify, "run invariant suites", input_=False)
    p.add_argument("--claims", action="store_true", help="only the lifted-cover claim suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES))
    p.add_argument("--seeds", type=int, default=None, help="override the number of seeded trials")
    p = add("envelope", cmd_envelope, "upper envelope and DS-order check of a profile family")
    p.add_argument("--order", type=int, default=None, help="DS order s to check")
    add("oracle", cmd_oracle, "brute-force optimum of a scheduling, cover or multi-cover instance")
    p = add("bench", cmd_bench, "seeded random sweep, CSV of ratios and timings", input_=False)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--max-jobs", type=int, default=5)
    p.add_argument("--max-machines", type=int, default=3)
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        doc = args.func(args)
    except InstanceError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (StageError, InfeasibleError, SizeLimitError) as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if doc is not None:
        _emit(doc, args.report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
