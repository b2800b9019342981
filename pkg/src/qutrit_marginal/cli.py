"""Command-line front end. Every command prints one JSON document on stdout.

Exit codes: 0 success, 1 infeasible input or failed verification,
2 malformed input (details as JSON on stderr).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import jsonio
from .constructor import construct, construct_numeric
from .decomposer import lp_decompose
from .errors import DomainError, InfeasibleError, NotInHullError
from .polytope import (
    EPoint,
    Functional,
    corner_points,
    facet_simplices,
    membership,
    parse_perm,
)
from .tensor_core import StateTensor, spectra
from .verifier import minimize_functional, necessity_sweep, run_suites

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc.msg}") from exc


def _load_epoint(path: str) -> EPoint:
    obj = _read_json(path)
    if isinstance(obj, list):
        obj = {"lambda": obj}
    return EPoint.from_json(obj)


def _load_state(path: str) -> StateTensor:
    obj = _read_json(path)
    if isinstance(obj, dict) and "state" in obj:
        obj = obj["state"]
    return StateTensor.from_json(obj)


def _emit(obj) -> None:
    sys.stdout.write(jsonio.dumps(obj) + "\n")


def cmd_check(args) -> int:
    report = membership(_load_epoint(args.epoint), args.tol)
    _emit(report.to_json())
    return EXIT_OK if report.member else EXIT_FAIL


def cmd_spectra(args) -> int:
    _emit(spectra(_load_state(args.state)).to_json())
    return EXIT_OK


def cmd_construct(args) -> int:
    x = _load_epoint(args.epoint)
    if args.numeric:
        state, residual = construct_numeric(x, args.seed, args.restarts, args.max_iters)
        trace = {"region": "numeric-fallback", "perm": [1, 2, 3], "residual": residual}
        _emit({"state": state.to_json(), "trace": trace})
        return EXIT_OK if residual < 1e-6 else EXIT_FAIL
    try:
        state, trace = construct(x)
    except InfeasibleError as exc:
        _emit({"error": str(exc), "membership": exc.report.to_json()})
        return EXIT_FAIL
    _emit({"state": state.to_json(), "trace": trace.to_json()})
    return EXIT_OK


def cmd_decompose(args) -> int:
    x = _load_epoint(args.epoint)
    try:
        dec = lp_decompose(corner_points(), x)
    except NotInHullError as exc:
        _emit({"error": str(exc), "residual": exc.residual})
        return EXIT_FAIL
    nonzero = {"weights": [{"label": lab, "w": w} for lab, w in dec.pairs() if w > 0.0]}
    _emit(nonzero)
    return EXIT_OK


def cmd_corners(args) -> int:
    _emit({"corners": [c.to_json() for c in corner_points()]})
    return EXIT_OK


def cmd_facets(args) -> int:
    _emit({"facets": [f.to_json() for f in facet_simplices()]})
    return EXIT_OK


def cmd_sample(args) -> int:
    report = necessity_sweep(args.n, args.seed)
    _emit(report.to_json())
    return EXIT_OK if report.failures == 0 else EXIT_FAIL


def cmd_minimize(args) -> int:
    f = Functional(args.functional, parse_perm(args.perm))
    report = minimize_functional(f, args.restarts, args.seed, args.max_iters)
    _emit(report.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suites(args.suite, args.seed, args.necessity_n, args.interior_n)
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qutrit-marginal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="membership test for an E-point")
    s.add_argument("epoint", help='JSON file with {"lambda": 3x3} ("-" for stdin)')
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("spectra", help="RDM spectra of a state")
    s.add_argument("state", help='JSON file with "re"/"im" 3x3x3 arrays ("-" for stdin)')
    s.set_defaults(func=cmd_spectra)

    s = sub.add_parser("construct", help="witness state for a feasible E-point")
    s.add_argument("epoint")
    s.add_argument("--numeric", action="store_true", help="use the gradient search instead")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--restarts", type=_positive, default=32)
    s.add_argument("--max-iters", type=_positive, default=5000)
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("decompose", help="convex weights over the corner points")
    s.add_argument("epoint")
    s.set_defaults(func=cmd_decompose)

    sub.add_parser("corners", help="list the corner points").set_defaults(func=cmd_corners)
    sub.add_parser("facets", help="list the facet simplices").set_defaults(func=cmd_facets)

    s = sub.add_parser("sample", help="necessity sweep over Haar-random states")
    s.add_argument("--n", type=_positive, default=10_000)
    s.add_argument("--seed", type=_seed, default=0)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("minimize", help="minimize a linear functional of the spectra")
    s.add_argument("--functional", default="P4")
    s.add_argument("--perm", default="123")
    s.add_argument("--restarts", type=_positive, default=64)
    s.add_argument("--max-iters", type=_positive, default=500)
    s.add_argument("--seed", type=_seed, default=0)
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("verify", help="run verification suites")
    s.add_argument("--suite", choices=("all", "facets", "roundtrip", "necessity"), default="all")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--necessity-n", type=_positive, default=100_000)
    s.add_argument("--interior-n", type=_positive, default=1000)
    s.set_defaults(func=cmd_verify)
    return p


def _error(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return EXIT_BAD_INPUT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error("usage", str(exc))
    try:
        return args.func(args)
    except (DomainError, ValueError) as exc:
        return _error("input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
