"""Command-line front end: ``rdlie <verb> --eq "<literal>" ...``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 unsupported family.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import sympy as sp

from . import conslaws, numeric, reduce as red
from .calculus import NotIntegrable, NotInvertible
from .classify import classify
from .equation import InvalidEquation, gauge_to_g1, parse_equation
from .equivgroup import (GROUPS, ConstraintViolation, MissingBinding, NoWitness,
                         UnsupportedFamily, apply, build_transformation, compose,
                         decide_admissible)
from .expr import EvaluationError, ParseError, parse, set_sampling_seed, to_text, x
from .symmetry import is_symmetry

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_UNSUPPORTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _floats(text, count, label):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--{label} expects {count} comma-separated numbers") from None
    if len(vals) != count:
        raise UsageError(f"--{label} expects {count} comma-separated numbers")
    return vals


def _params(text):
    out = {}
    for chunk in filter(None, (c.strip() for c in (text or "").split(","))):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise UsageError(f"bad parameter {chunk!r}; expected name=value")
        out[key.strip()] = value.strip()
    return out


def _emit(args, payload, human):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human(payload))


def _gauged(eq):
    """Gauge to g=1; returns (equation, gauge transformation or None)."""
    if eq.gauged:
        return eq, None
    return gauge_to_g1(eq)


# ---------------------------------------------------------------------------
# verbs

def cmd_classify(args):
    eq, gauge = _gauged(args.equation)
    res = classify(eq)
    payload = res.to_json()
    if gauge is not None:
        payload["normalizer"] = compose(res.normalizer, gauge).to_json()
    payload["equation"] = args.equation.literal()

    def human(p):
        nf = "; ".join(f"{k}={v}" for k, v in p["normal_form"].items())
        lines = [f"case {p['case']}", f"normal form: {nf}", "basis:"]
        lines += [f"  {g}" for g in p["basis"]]
        lines += [f"warning: {w}" for w in p["warnings"]]
        return "\n".join(lines)

    _emit(args, payload, human)
    return EXIT_OK


def cmd_transform(args):
    eq = args.equation
    if args.group:
        params = _params(args.params)
        if args.group in ("G1", "Ghat", "G1mn1", "Gm1const", "additional"):
            params.setdefault("n", to_text(eq.n))
        tr = build_transformation(args.group, params)
    else:
        eq, gauge = _gauged(eq)
        res = classify(eq)
        tr = res.normalizer if gauge is None else compose(res.normalizer, gauge)
        eq = args.equation
    image = apply(tr, eq)
    payload = {"equation": eq.literal(), "transformation": tr.to_json(),
               "image": image.literal()}
    _emit(args, payload, lambda p: f"T = {p['transformation']['T']}\n"
          f"X = {p['transformation']['X']}\nV = {p['transformation']['V']}\n"
          f"image: {p['image']}")
    return EXIT_OK


def cmd_conserve(args):
    eq = args.equation
    if not eq.gauged:
        raise UnsupportedFamily("conservation laws are computed for g = 1; gauge first")
    laws = conslaws.conservation_laws(eq)
    verified = [conslaws.verify_divergence(cv, eq) for cv in laws]
    payload = {"equation": eq.literal(), "dimension": len(laws),
               "laws": [dict(cv.to_json(), verified=ok) for cv, ok in zip(laws, verified)]}

    def human(p):
        lines = [f"dimension {p['dimension']}"]
        for k, law in enumerate(p["laws"], 1):
            lines.append(f"  [{k}] F = {law['F']}; G = {law['G']}; "
                         f"characteristic = {law['characteristic']}"
                         f"{'' if law['verified'] else '  (divergence check FAILED)'}")
        return "\n".join(lines)

    _emit(args, payload, human)
    return EXIT_OK if all(verified) else EXIT_FAIL


def _case_constants(eq, case):
    if case == 9:
        return {"n": eq.n, "alpha": sp.simplify(eq.h * x ** 2)}
    return {"n": eq.n, "alpha": eq.h}


def _closed_form(case, row, consts):
    branch = {"9.2": "9.2", "9.4": "9.4", "9.D": "stationary", "12.2": "12.2",
              "12.4": "12.4", "12.D": "stationary"}.get(row)
    if branch is None:
        return None
    try:
        return red.exact_solution(case, branch, consts)
    except red.BranchError:
        return None


def cmd_reduce(args):
    eq = args.equation
    res = classify(eq) if eq.gauged else None
    if res is None or res.case_id not in (9, 12):
        raise UnsupportedFamily("reductions are tabulated for cases 9 and 12 only")
    case = res.case_id
    target = res.normal_form
    consts = _case_constants(target, case)
    rows = []
    for a in red.list_reductions(case, target.n):
        entry = dict(a.to_json())
        entry["reduced_ode"] = to_text(red.reduce_equation(target, a))
        sol = _closed_form(case, a.row, consts)
        if sol is not None:
            entry["closed_form"] = to_text(sol.u)
            entry["validity"] = sol.validity
        rows.append(entry)
    payload = {"equation": eq.literal(), "case": case, "normal_form": target.literal(),
               "rows": rows}

    def human(p):
        lines = [f"case {p['case']}: {p['normal_form']}"]
        for r in p["rows"]:
            lines.append(f"{r['row']:5} omega = {r['omega']}; u = {r['template']}")
            lines.append(f"      ODE: {r['reduced_ode']} = 0")
            if "closed_form" in r:
                lines.append(f"      u = {r['closed_form']}  [{r['validity']}]")
        return "\n".join(lines)

    _emit(args, payload, human)
    return EXIT_OK


def _battery(eq):
    """(label, passed) pairs for the verification report."""
    checks = []
    geq, _ = _gauged(eq)
    res = classify(geq)
    checks.append((f"classified as case {res.case_id}", not res.warnings))
    for gen in res.basis:
        checks.append((f"symmetry {gen}", is_symmetry(gen, res.normal_form)))
    try:
        laws = conslaws.conservation_laws(geq)
    except conslaws.NoClosedFormFundamentalPair:
        laws = []
        checks.append(("conservation laws in closed form", False))
    for cv in laws:
        checks.append((f"divergence of ({to_text(cv.F)}, {to_text(cv.G)})",
                       conslaws.verify_divergence(cv, geq)))
    if res.case_id in (9, 12):
        consts = _case_constants(res.normal_form, res.case_id)
        for a in red.list_reductions(res.case_id, res.normal_form.n):
            sol = _closed_form(res.case_id, a.row, consts)
            if sol is not None:
                grid = numeric.Grid(1.0, 2.0, 32, 0.0, 0.1)
                try:
                    r = numeric.grid_residual(sol.equation, sol.u, grid)
                except EvaluationError:
                    continue
                checks.append((f"exact solution {a.row}: {to_text(sol.u)}", r < 1e-8))
    return checks


def cmd_verify(args):
    checks = _battery(args.equation)
    payload = {"equation": args.equation.literal(),
               "checks": [{"check": c, "passed": bool(ok)} for c, ok in checks],
               "passed": all(ok for _, ok in checks)}
    _emit(args, payload, lambda p: "\n".join(
        [f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}" for c in p["checks"]]
        + [f"overall: {'PASS' if p['passed'] else 'FAIL'}"]))
    return EXIT_OK if payload["passed"] else EXIT_FAIL


def cmd_simulate(args):
    eq = args.equation
    x0, x1, nx = _floats(args.grid, 3, "grid")
    t0, t1 = _floats(args.tspan, 2, "tspan")
    grid = numeric.Grid(x0, x1, int(nx), t0, t1, args.boundary)
    u0 = parse(args.u0)
    sol = numeric.solve_pde(eq, u0, grid)
    if args.dump:
        sol.write_csv(args.dump)
    drift = []
    if eq.gauged:
        try:
            laws = conslaws.conservation_laws(eq)
        except conslaws.NoClosedFormFundamentalPair:
            laws = []
        for cv in laws:
            drift.append({"F": to_text(cv.F),
                          "drift": numeric.conserved_integral_drift(sol, cv, eq)})
    payload = {"equation": eq.literal(), "steps": len(sol.dt_history),
               "positivity_violations": sol.positivity_violations, "drift": drift,
               "dump": args.dump}
    if not args.dump and not args.json:
        sol.write_csv(sys.stdout)
        for d in drift:
            print(f"drift of {d['F']}: {d['drift']:.3e}", file=sys.stderr)
        return EXIT_OK
    _emit(args, payload, lambda p: "\n".join(
        [f"steps: {p['steps']}", f"positivity violations: {p['positivity_violations']}"]
        + [f"drift of {d['F']}: {d['drift']:.3e}" for d in p["drift"]]))
    return EXIT_OK


def cmd_admissible(args):
    if args.equation2 is None:
        raise UsageError("admissible needs --eq2")
    dec = decide_admissible(args.equation, args.equation2)
    payload = {"branch": dec.branch, "reason": dec.reason}
    if isinstance(dec.witness, NoWitness) or dec.witness is None:
        payload["witness"] = None
    else:
        payload["witness"] = dec.witness.to_json()
        payload["image"] = dec.image.literal()
        cvs = conslaws.conservation_laws(dec.image) if dec.image.gauged else []
        payload["witness_divergence_checked"] = all(
            conslaws.verify_divergence(cv, dec.image) for cv in cvs)
    _emit(args, payload, lambda p: f"branch: {p['branch']}\n" + (
        f"witness: T={p['witness']['T']}, X={p['witness']['X']}, V={p['witness']['V']}"
        if p["witness"] else f"no witness: {p['reason']}"))
    return EXIT_OK


VERBS = {"classify": cmd_classify, "transform": cmd_transform, "conserve": cmd_conserve,
         "reduce": cmd_reduce, "verify": cmd_verify, "simulate": cmd_simulate,
         "admissible": cmd_admissible}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdlie", description="Lie symmetries and equivalence "
                                "transformations of f(x)u_t=(g(x)u^n u_x)_x+h(x)u^m.")
    p.add_argument("verb", choices=sorted(VERBS))
    p.add_argument("--eq", required=True, help='e.g. "f=1; g=1; h=1; n=2; m=5"')
    p.add_argument("--eq2")
    p.add_argument("--json", action="store_true")
    p.add_argument("--grid", default="1,2,200", help="x0,x1,nx")
    p.add_argument("--tspan", default="0,0.5", help="t0,t1")
    p.add_argument("--dump", help="CSV path for simulate")
    p.add_argument("--seed", type=int)
    p.add_argument("--u0", default="1", help="initial data for simulate")
    p.add_argument("--boundary", default=numeric.DIRICHLET,
                   choices=[numeric.DIRICHLET, numeric.ZERO_FLUX])
    p.add_argument("--group", choices=sorted(GROUPS), help="explicit group for transform")
    p.add_argument("--params", help="group parameters, e.g. delta1=2,delta7=3/2")
    return p


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    seed = args.seed if args.seed is not None else os.environ.get("RDLIE_SEED")
    if seed is not None:
        set_sampling_seed(int(seed))
    try:
        args.equation = parse_equation(args.eq)
        args.equation2 = parse_equation(args.eq2) if args.eq2 else None
        return VERBS[args.verb](args)
    except (InvalidEquation, ParseError, UsageError, MissingBinding,
            ConstraintViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnsupportedFamily, NotIntegrable, NotInvertible, red.CaseMismatch,
            conslaws.NoClosedFormFundamentalPair, numeric.UnsupportedFlow) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except numeric.NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
