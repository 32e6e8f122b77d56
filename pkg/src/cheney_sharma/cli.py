"""Command-line entry point: ``cheney-sharma {weights,eval,verify,table}``.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 a verification check failed (its report is still printed), 2 usage or
domain error.  A reader closing the pipe early ends the run quietly with 1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .abel import bivariate_weights, univariate_weights
from .core import CORPUS, FunctionDescriptor, LipschitzSpec, OperatorParams, SimplexPoint
from .operators import eval_G, eval_Q
from . import properties as props

DEFAULT_TOL = {
    "abel-jensen": 1e-11,
    "partition": 1e-12,
    "bernstein0": 1e-12,
    "difference": 1e-10,
    "marginal": 1e-11,
    "lipschitz": 1e-9,
    "modulus": 1e-10,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _descriptor(text: str) -> FunctionDescriptor:
    try:
        return FunctionDescriptor.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_operator_args(p: argparse.ArgumentParser, n_default=None, beta_default=None) -> None:
    p.add_argument("--n", type=int, required=n_default is None, default=n_default)
    p.add_argument("--beta", type=float, required=beta_default is None, default=beta_default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cheney-sharma",
                     description="Univariate and simplex Cheney-Sharma operators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("weights", help="dump basis weights at a point")
    _add_operator_args(p)
    p.add_argument("--x", required=True, help="x1,x2 (or x with --univariate)")
    p.add_argument("--univariate", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--method", choices=("auto", "direct", "log"), default="auto")

    p = sub.add_parser("eval", help="evaluate Q or G on a function")
    p.add_argument("--op", choices=("G", "Q"), required=True)
    p.add_argument("--f", type=_descriptor, required=True)
    _add_operator_args(p)
    p.add_argument("--x", required=True)

    p = sub.add_parser("verify", help="run a verification scan, print a JSON report")
    checks = p.add_subparsers(dest="check", required=True, parser_class=_Parser)
    for name in DEFAULT_TOL:
        c = checks.add_parser(name)
        c.add_argument("--trials", type=int, default=1000)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--tol", type=float, default=DEFAULT_TOL[name])
        if name == "abel-jensen":
            c.add_argument("--m-max", type=int, default=30)
            continue
        _add_operator_args(c, n_default=10, beta_default=0.0 if name == "bernstein0" else 0.1)
        if name in ("bernstein0", "difference"):
            c.add_argument("--f", type=_descriptor, default=None,
                           help="restrict to one function (default: built-in corpus)")
        elif name == "lipschitz":
            c.add_argument("--f", type=_descriptor, required=True)
            c.add_argument("--mu", type=float, required=True)
            c.add_argument("--M", type=float, required=True)
        elif name == "modulus":
            c.add_argument("--f", type=_descriptor, required=True)

    p = sub.add_parser("table", help="empirical sup-error table as CSV")
    p.add_argument("--f", type=_descriptor, required=True)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--beta-schedule", required=True, help="const:b | decay:c | decay2:c")
    p.add_argument("--grid", type=int, default=50)
    return parser


def _cmd_weights(args) -> int:
    params = OperatorParams(args.n, args.beta)
    if args.univariate:
        table = univariate_weights(params, float(args.x), args.method)
    else:
        table = bivariate_weights(params, SimplexPoint.parse(args.x), args.method)
    if args.format == "csv":
        sys.stdout.write(table.to_csv())
    else:
        sys.stdout.write(json.dumps(table.to_dict(), indent=2) + "\n")
    return 0


def _cmd_eval(args) -> int:
    params = OperatorParams(args.n, args.beta)
    if args.op == "Q":
        value = eval_Q(args.f, params, _unit_interval(args.x))
    else:
        value = eval_G(args.f, params, SimplexPoint.parse(args.x))
    sys.stdout.write(f"{value:.17g}\n")
    return 0


def _unit_interval(text: str) -> float:
    x = float(text)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"univariate point must lie in [0, 1], got {x}")
    return x


def _cmd_verify(args) -> int:
    check = args.check
    if check == "abel-jensen":
        report = props.verify_abel_jensen(args.trials, args.seed, args.tol, m_max=args.m_max)
    else:
        params = OperatorParams(args.n, args.beta)
        if check == "partition":
            report = props.verify_partition(params, args.trials, args.seed, args.tol)
        elif check == "bernstein0":
            if params.beta != 0.0:
                raise ValueError("bernstein0 compares at beta = 0; drop --beta or pass 0")
            fs = CORPUS if args.f is None else (args.f,)
            report = props.verify_bernstein_degeneration(params.n, args.trials, args.seed,
                                                         args.tol, fs)
        elif check == "difference":
            fs = CORPUS if args.f is None else (args.f,)
            report = props.verify_difference_expansion(params, args.trials, args.seed,
                                                       args.tol, fs)
        elif check == "marginal":
            report = props.verify_marginal_collapse(params, args.trials, args.seed, args.tol)
        elif check == "lipschitz":
            spec = LipschitzSpec(args.mu, args.M)
            report = props.verify_lipschitz_preservation(args.f, spec, params, args.trials,
                                                         args.seed, args.tol)
        else:
            report = props.verify_modulus_axioms(args.f, params, args.trials, args.seed,
                                                 args.tol)
    sys.stdout.write(report.to_json() + "\n")
    return 0 if report.passed else 1


def _cmd_table(args) -> int:
    rows = props.convergence_table(args.f, args.n_list, args.beta_schedule, args.grid)
    out = ["n,beta,sup_error"] + [f"{n},{b:.17g},{e:.17g}" for n, b, e in rows]
    sys.stdout.write("\n".join(out) + "\n")
    return 0


_COMMANDS = {"weights": _cmd_weights, "eval": _cmd_eval,
             "verify": _cmd_verify, "table": _cmd_table}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
