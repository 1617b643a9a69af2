"""Command-line interface: generate systems, verify claims, reduce, evaluate.

Exit codes: 0 success / all claims pass, 1 verification failure, 2 usage
error, 3 engine error (term or step cap exceeded, transport failure).
Report files are deterministic for fixed flags and seed; wall-clock millis
are written only with --timings (the summary table always shows them).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import claims, diffalg, exprio, hierarchies as hier, numoracle, reduction
from .diffalg import DiffAlgError

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_ENGINE = 3

GEN_SYSTEMS = ("ch", "qiao", "bcbs", "bmcbs", "msys", "mcbs-sys", "cbs", "miura")

_SPACES = {
    "ch": hier.ch_space,
    "q": hier.q_space,
    "r": hier.r_space,
    "mr": hier.mr_space,
}


def _equations(system, n):
    if system == "ch":
        return hier.gen_ch(n)
    if system == "qiao":
        return hier.gen_qiao(n)
    if system == "bcbs":
        return list(hier.gen_cbs_family(n).bcbs)
    if system == "msys":
        return list(hier.gen_cbs_family(n).msys)
    if system == "cbs":
        return list(hier.gen_cbs_family(n).cbs)
    if system == "bmcbs":
        return list(hier.gen_mcbs_family(n).bmcbs)
    if system == "mcbs-sys":
        return list(hier.gen_mcbs_family(n).msys)
    if system == "miura":
        return hier.gen_miura_relations(n)
    raise ValueError(f"unknown system {system!r}")


def cmd_gen(args):
    try:
        eqs = _equations(args.system, args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        payload = [{
            "label": eq.label,
            "system": eq.system,
            "i": eq.i,
            "n": eq.n,
            "expr": json.loads(exprio.to_json(eq.residual)),
        } for eq in eqs]
        print(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_PASS
    for eq in eqs:
        print(f"{eq.label}: {exprio.print_expr(eq.residual, args.format)}")
    return EXIT_PASS


def _select_claims(selector):
    if selector.strip().lower() == "all":
        return list(claims.CLAIM_IDS)
    out = []
    for raw in selector.split(","):
        cid = raw.strip().upper()
        if cid not in claims.CLAIM_IDS:
            raise ValueError(f"unknown claim {raw.strip()!r} (expected C1..C9 or all)")
        out.append(cid)
    return out


def cmd_verify(args):
    try:
        selected = _select_claims(args.claim)
        if args.n_max < 1:
            raise ValueError("--n-max must be >= 1")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.term_cap:
        diffalg.set_term_cap(args.term_cap)
    jobs = args.jobs if args.jobs is not None else (os.cpu_count() or 1)
    reports = claims.run_all(
        args.n_max, claims=selected, seed=args.seed, jobs=jobs,
        step_cap=args.step_cap, term_cap=args.term_cap, zero_tol=args.zero_tol)
    records = [rep.record(include_millis=args.timings) for rep in reports]
    text = json.dumps(records, indent=2, sort_keys=True) + "\n"

    out = sys.stdout if args.report else sys.stderr
    print(f"{'claim':<6} {'n':>2} {'status':<6} {'cofactor':<14} {'terms':>6} {'millis':>9}",
          file=out)
    for rep in reports:
        print(f"{rep.claim:<6} {rep.n:>2} {rep.status:<6} "
              f"{rep.cofactor or '-':<14} {rep.terms:>6} {rep.duration * 1000:>9.1f}",
              file=out)
    npass = sum(1 for rep in reports if rep.status == "pass")
    nfail = sum(1 for rep in reports if rep.status == "fail")
    nerr = sum(1 for rep in reports if rep.status == "error")
    total = sum(rep.duration for rep in reports)
    print(f"{len(reports)} cells: {npass} pass, {nfail} fail, {nerr} error"
          f" ({total:.1f} s of cell time)", file=out)
    for rep in reports:
        if rep.status != "pass":
            for line in rep.details():
                print(f"  {rep.claim} n={rep.n}: {line}", file=out)

    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if nerr:
        return EXIT_ENGINE
    if nfail:
        return EXIT_FAIL
    return EXIT_PASS


def cmd_reduce(args):
    which = args.system.upper()
    space = hier.ch_space(args.n) if which == "CH" else hier.r_space(args.n)
    try:
        system = reduction.standard_systems(which, args.n, step_cap=args.step_cap)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    source = args.expr if args.expr is not None else sys.stdin.read()
    try:
        expr = exprio.parse(source, space)
    except exprio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    result = system.reduce(expr)
    print(exprio.print_expr(result, args.format))
    return EXIT_PASS


def cmd_eval(args):
    space = _SPACES[args.space](args.n)
    try:
        expr = exprio.parse(args.expr, space)
    except exprio.ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    tf = numoracle.TestFunction(space, args.seed)
    rng = random.Random(args.seed * 65537 + 1)
    jets = list(expr.jets())
    for _ in range(1000):
        coords = tf.sample_coords(rng)
        try:
            value = numoracle.eval_expr(expr, tf.point(jets, coords))
        except numoracle.SmallDenominatorError:
            continue
        coord_text = ", ".join(f"{v}={coords[v]:.6f}" for v in space.vars)
        print(f"{value!r}  at  {coord_text}")
        return EXIT_PASS
    print("error: no well-conditioned sample point found", file=sys.stderr)
    return EXIT_ENGINE


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jetcalc",
        description="Generate and machine-verify the Camassa-Holm/Qiao "
                    "hierarchy transformation identities.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="print an equation family")
    gen.add_argument("--system", required=True, choices=GEN_SYSTEMS)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--format", default="text", choices=("text", "latex", "json"))
    gen.set_defaults(func=cmd_gen)

    verify = sub.add_parser("verify", help="run claim verifications")
    verify.add_argument("--claim", default="all",
                        help="'all' or a comma list of C1..C9")
    verify.add_argument("--n-max", type=int, default=4)
    verify.add_argument("--report", default=None,
                        help="path for the JSON report (default: stdout)")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--jobs", type=int, default=None,
                        help="parallel worker processes (default: cpu count)")
    verify.add_argument("--term-cap", type=int, default=None,
                        help=f"expression-size guard (default {diffalg.DEFAULT_TERM_CAP})")
    verify.add_argument("--step-cap", type=int, default=reduction.DEFAULT_STEP_CAP,
                        help="rewrite step guard per reduction")
    verify.add_argument("--zero-tol", type=float, default=numoracle.ZERO_TOL,
                        help="relative tolerance for numeric zero confirmation")
    verify.add_argument("--timings", action="store_true",
                        help="include wall-clock millis in the report file")
    verify.set_defaults(func=cmd_verify)

    red = sub.add_parser("reduce", help="reduce an expression modulo a standard system")
    red.add_argument("--system", required=True, choices=("ch", "bcbs"))
    red.add_argument("--n", type=int, required=True)
    red.add_argument("--expr", default=None, help="expression text (default: stdin)")
    red.add_argument("--format", default="text", choices=("text", "latex", "json"))
    red.add_argument("--step-cap", type=int, default=reduction.DEFAULT_STEP_CAP)
    red.set_defaults(func=cmd_reduce)

    ev = sub.add_parser("eval", help="numeric evaluation at a seeded sample point")
    ev.add_argument("--space", required=True, choices=tuple(_SPACES))
    ev.add_argument("--n", type=int, required=True)
    ev.add_argument("--expr", required=True)
    ev.add_argument("--seed", type=int, default=0)
    ev.set_defaults(func=cmd_eval)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DiffAlgError as exc:
        print(f"engine error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
