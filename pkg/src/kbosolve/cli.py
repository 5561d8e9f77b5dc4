"""Command-line surface.

Exit codes: 0 = SAT/success, 1 = UNSAT/no witness, 2 = input error,
3 = resource limit exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import counting, dio, lia, oracle
from .formulas import (
    ArityMismatchError,
    FormulaSyntaxError,
    format_formula,
    parse_formula,
    parse_term,
)
from .isolation import ResourceLimitError
from .solver import Limits, solve
from .terms import (
    Comparison,
    SignatureError,
    SignatureSyntaxError,
    format_term,
    kbo_compare,
    load_signature,
)

EXIT_OK = 0
EXIT_NO = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


class _InputError(Exception):
    pass


def _load_sig(path: str):
    try:
        return load_signature(path)
    except FileNotFoundError as exc:
        raise _InputError(f"cannot read signature file: {exc}") from exc
    except (SignatureSyntaxError, SignatureError) as exc:
        raise _InputError(f"invalid signature: {exc}") from exc


def _parse(text: str, params):
    try:
        return parse_formula(text, params)
    except (FormulaSyntaxError, ArityMismatchError) as exc:
        raise _InputError(f"invalid formula: {exc}") from exc


def _read_formula(args) -> str:
    if args.formula is not None:
        return args.formula
    try:
        with open(args.formula_file, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _InputError(f"cannot read formula file: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kbosolve",
        description="Decide satisfiability of Knuth-Bendix ordering constraints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a signature file")
    p.add_argument("--sig", required=True)

    p = sub.add_parser("compare", help="compare two ground terms")
    p.add_argument("--sig", required=True)
    p.add_argument("left")
    p.add_argument("right")

    p = sub.add_parser("solve", help="decide a constraint formula")
    p.add_argument("--sig", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--formula")
    group.add_argument("--formula-file")
    p.add_argument("--max-branches", type=int, default=1_000_000)
    p.add_argument("--trace", action="store_true")

    p = sub.add_parser("count", help="count ground terms of a weight, truncated")
    p.add_argument("--sig", required=True)
    p.add_argument("--weight", type=int, required=True)
    p.add_argument("--cap", type=int, required=True)

    p = sub.add_parser("at-least", help="print the counting formula for a threshold")
    p.add_argument("--sig", required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("encode-dio", help="encode a linear Diophantine system")
    p.add_argument("equations", help="e.g. 'x1 + x2 + 3 = x0; x0 + 1 = x2'")

    p = sub.add_parser("oracle", help="enumerate ground terms within a bound")
    p.add_argument("--sig", required=True)
    p.add_argument("--max-weight", type=int, required=True)
    p.add_argument("--max-f-height", type=int, default=0)

    args = parser.parse_args(argv)
    try:
        return _run(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT


def _run(args) -> int:
    if args.command == "validate":
        _load_sig(args.sig)
        print("ok")
        return EXIT_OK

    if args.command == "compare":
        params = _load_sig(args.sig)
        try:
            left = parse_term(args.left, params)
            right = parse_term(args.right, params)
        except (FormulaSyntaxError, ArityMismatchError) as exc:
            raise _InputError(f"invalid term: {exc}") from exc
        from .terms import is_ground

        if not (is_ground(left) and is_ground(right)):
            raise _InputError("compare requires ground terms")
        print(kbo_compare(left, right, params).value)
        return EXIT_OK

    if args.command == "solve":
        params = _load_sig(args.sig)
        formula = _parse(_read_formula(args), params)
        trace = (lambda msg: print(f"# {msg}", file=sys.stderr)) if args.trace else None
        verdict = solve(formula, params, Limits(max_branches=args.max_branches), trace=trace)
        if verdict.sat:
            print("SAT")
            assert verdict.witness is not None
            for name in sorted(verdict.witness):
                print(f"{name} := {format_term(verdict.witness[name])}")
            return EXIT_OK
        print("UNSAT")
        return EXIT_NO

    if args.command == "count":
        params = _load_sig(args.sig)
        if args.weight < 0 or args.cap < 0:
            raise _InputError("weight and cap must be naturals")
        print(oracle.count_weight(params, args.weight, args.cap))
        return EXIT_OK

    if args.command == "at-least":
        params = _load_sig(args.sig)
        if args.n <= 0:
            raise _InputError("--n must be positive")
        print(lia.format_formula(counting.at_least(args.n, params)))
        return EXIT_OK

    if args.command == "encode-dio":
        try:
            system = dio.parse_dio_system(args.equations)
            params, formula = dio.encode_dio(system)
        except dio.MalformedEquationError as exc:
            raise _InputError(str(exc)) from exc
        for s in params.symbols:
            print(f"symbol {s.name} {s.arity} {s.weight}")
        print("precedence " + " > ".join(params.precedence))
        print(format_formula(formula))
        return EXIT_OK

    if args.command == "oracle":
        params = _load_sig(args.sig)
        if args.max_weight < 0 or args.max_f_height < 0:
            raise _InputError("bounds must be naturals")
        bound = oracle.EnumBound(args.max_weight, args.max_f_height)
        for t in oracle.enum_terms(params, bound):
            print(format_term(t))
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
