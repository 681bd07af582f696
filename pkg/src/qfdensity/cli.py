"""Command-line front end.

Subcommands: density, table, local, empirical, exceptions, sieve,
construct, check.  Exit codes: 0 success, 2 parse/usage errors,
3 domain refusals (e.g. exact exceptions of an indefinite ternary).
All rationals are printed exactly as "a/b"; --float adds a decimal
rendering for display only.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .density import DensityError, density, residue_sieve, theorem_checks
from .enumeration import (
    EnumerationError,
    empirical_density,
    exceptional_set,
    write_bitmap,
)
from .forms import DegenerateFormError, FormError, make_form, parse_form
from .inverse import InverseError, greedy_interval_product, v2_density_construction
from .local import LocalError, local_density, representation_table

PARSE_ERROR = 2
DOMAIN_ERROR = 3


class _Exit2Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(PARSE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    top = _Exit2Parser(prog="qfdensity", description=__doc__)
    top.add_argument("--json", action="store_true", help="machine-readable output")
    top.add_argument(
        "--float", action="store_true", dest="as_float",
        help="append decimal approximations (display only)",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add_form_command(name, help_text):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("form", nargs="?", help="form expression, e.g. 'x^2+5*x*y'")
        cmd.add_argument("--coeffs", help="comma-separated upper-triangle coefficients")
        cmd.add_argument("--arity", type=int, help="number of variables for --coeffs")
        return cmd

    add_form_command("density", "exact density with per-prime factors")
    t = add_form_command("table", "representation table at a prime")
    t.add_argument("--p", type=int, required=True)
    l = add_form_command("local", "exact local density at a prime")
    l.add_argument("--p", type=int, required=True)
    e = add_form_command("empirical", "counting density up to a bound")
    e.add_argument("--limit", type=int, required=True)
    x = add_form_command("exceptions", "locally represented but missed integers")
    x.add_argument("--limit", type=int, required=True)
    x.add_argument("--out", help="write members to a file")
    x.add_argument("--bitmap", action="store_true", help="write --out as a QFD1 bitmap")
    s = add_form_command("sieve", "residue sieve of truncated local conditions")
    s.add_argument("--cutoff", type=int, required=True)
    add_form_command("check", "structural checks on the computed density")
    c = sub.add_parser("construct", help="inverse constructions")
    c.add_argument("--alpha", help="interval lower end, a/b")
    c.add_argument("--beta", help="interval upper end, a/b")
    c.add_argument("--v2", type=int, help="target 2-adic valuation k")
    return top


def _parse_fraction(text: str, parser) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        parser.exit(PARSE_ERROR, f"qfdensity: error: bad rational {text!r}\n")


def _form_from_args(args, parser):
    if args.coeffs is not None and args.form is not None:
        parser.exit(PARSE_ERROR, "qfdensity: error: give a form expression or --coeffs, not both\n")
    try:
        if args.coeffs is not None:
            if args.arity is None:
                parser.exit(PARSE_ERROR, "qfdensity: error: --coeffs requires --arity\n")
            return make_form(args.arity, [int(c) for c in args.coeffs.split(",")])
        if args.form is None:
            parser.exit(PARSE_ERROR, "qfdensity: error: missing form\n")
        return parse_form(args.form)
    except DegenerateFormError as exc:
        raise _Domain(str(exc))
    except (FormError, ValueError) as exc:
        parser.exit(PARSE_ERROR, f"qfdensity: error: {exc}\n")


class _Domain(Exception):
    pass


def _frac_str(x: Fraction, as_float: bool) -> str:
    return f"{x} (~{float(x):.6g})" if as_float else str(x)


def _emit(payload: dict, args, human_lines) -> None:
    if args.json:
        print(json.dumps(payload))
    else:
        for line in human_lines:
            print(line)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args, parser)
    except _Domain as exc:
        print(f"qfdensity: {exc}", file=sys.stderr)
        return DOMAIN_ERROR
    except (DensityError, EnumerationError, InverseError, LocalError) as exc:
        print(f"qfdensity: {exc}", file=sys.stderr)
        return DOMAIN_ERROR


def _dispatch(args, parser) -> int:
    cmd = args.command
    if cmd == "construct":
        return _cmd_construct(args, parser)
    f = _form_from_args(args, parser)
    if cmd == "density":
        report = density(f)
        payload = report.to_json_dict()
        lines = [f"density = {_frac_str(report.density, args.as_float)}",
                 f"case: {report.case_tag}"]
        lines += [f"  p={p}: {v}" for p, v in sorted(report.factors.items())]
        _emit(payload, args, lines)
    elif cmd == "table":
        table = representation_table(f, args.p)
        payload = table.to_json_dict()
        vs = " ".join(str(v) for v in payload["v"])
        _emit(payload, args, [f"p = {args.p}", f"reps = {payload['reps']}", f"v = [{vs}]"])
    elif cmd == "local":
        d = local_density(f, args.p)
        _emit({"p": args.p, "density": str(d)}, args,
              [f"delta_{args.p} = {_frac_str(d, args.as_float)}"])
    elif cmd == "empirical":
        emp = empirical_density(f, args.limit)
        exact = density(f).density
        gap = abs(emp - exact)
        payload = {"limit": args.limit, "empirical": str(emp), "exact": str(exact), "gap": str(gap)}
        _emit(payload, args, [
            f"empirical density at {args.limit}: {_frac_str(emp, args.as_float)}",
            f"exact density: {_frac_str(exact, args.as_float)}",
            f"gap: {_frac_str(gap, args.as_float)}",
        ])
    elif cmd == "exceptions":
        es = exceptional_set(f, args.limit)
        if args.out:
            if args.bitmap:
                bits = 0
                for m in es.members:
                    if m > 0:
                        bits |= 1 << m
                write_bitmap(args.out, bits, args.limit)
            else:
                with open(args.out, "w") as fh:
                    fh.write("\n".join(str(m) for m in es.members) + "\n")
        payload = {"limit": es.X, "count": len(es.members), "members": list(es.members)}
        _emit(payload, args, [" ".join(str(m) for m in es.members) or "(none)"])
    elif cmd == "sieve":
        sieve = residue_sieve(f, args.cutoff)
        payload = {
            "modulus": sieve.modulus,
            "classes": sieve.class_count,
            "density": str(sieve.density),
        }
        _emit(payload, args, [
            f"modulus = {sieve.modulus}",
            f"classes = {sieve.class_count}",
            f"truncated density = {_frac_str(sieve.density, args.as_float)}",
        ])
    elif cmd == "check":
        payload = theorem_checks(f)
        lines = [f"{k}: {v}" for k, v in payload.items()]
        _emit(payload, args, lines)
    else:
        parser.exit(PARSE_ERROR, f"qfdensity: error: unknown command {cmd!r}\n")
    return 0


def _cmd_construct(args, parser) -> int:
    if args.v2 is not None:
        if args.alpha is not None or args.beta is not None:
            parser.exit(PARSE_ERROR, "qfdensity: error: use either --v2 or --alpha/--beta\n")
        p, delta = v2_density_construction(args.v2)
        payload = {"p": p, "delta": str(delta), "k": args.v2}
        _emit(payload, args, [f"p = {p}", f"delta = {_frac_str(delta, args.as_float)}"])
        return 0
    if args.alpha is None or args.beta is None:
        parser.exit(PARSE_ERROR, "qfdensity: error: construct needs --alpha and --beta, or --v2\n")
    alpha = _parse_fraction(args.alpha, parser)
    beta = _parse_fraction(args.beta, parser)
    plan = greedy_interval_product(alpha, beta)
    _emit(plan.to_json_dict(), args, [
        f"primes = {list(plan.primes)}",
        f"product = {_frac_str(plan.product, args.as_float)}",
        f"interval = ({alpha}, {beta})",
    ])
    return 0


if __name__ == "__main__":
    sys.exit(main())
