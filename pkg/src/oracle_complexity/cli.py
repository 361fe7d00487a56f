"""Command-line front end.

Exit codes: 0 success, 1 a verified claim failed, 2 unreadable input,
3 precondition or infeasibility, 4 catalog cap exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import formats
from .constructions import (
    Budget,
    chebyshev_budget,
    embed_coordinate,
    filter_posterior,
    k_for_alpha,
    mix,
    repeat_n,
    truncate,
)
from .errors import FormatError, OracleComplexityError, PreconditionError
from .exact import fmt, frac, sqrt
from .instances import BUILTINS
from .solver import (
    default_cap,
    dist_frontier,
    dist_value,
    enumerate_trees,
    randomized_value,
    worst_case_depth,
)
from .strategy import evaluate, mu_aggregates
from . import verify as harness

CHECKS = ("additivity", "continuity", "minimax", "direct-sum", "truncation", "derandomization")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise FormatError(f"{self.prog}: {message}")


def _fraction(text: str) -> Fraction:
    try:
        return frac(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"expected a fraction string like 3/4, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected an integer >= 1")
    return v


def _depth(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError("depth must be >= 0")
    return v


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _source(args, p):
    if getattr(args, "source", "oracle") == "catalog":
        return enumerate_trees(p, args.T, args.cap)
    return args.T


# -- subcommands -------------------------------------------------------------------------


def cmd_solve(args) -> int:
    p = formats.load_problem(args.problem)
    if args.mode == "dist-frontier":
        curve = dist_frontier(p, _source(args, p))
        _emit(formats.frontier_csv(curve.vertices, args.decimal), args.out)
    elif args.mode == "dist-value":
        res = dist_value(p, _source(args, p), _need(args.epsilon, "--epsilon"), args.lp)
        doc = {"epsilon": fmt(args.epsilon), "depth": args.T, "value": _show(res.value),
               "mixture": formats.strategy_to_json(res.mixture)}
        _emit(formats.dumps(doc), args.out)
    elif args.mode == "randomized":
        g = randomized_value(p, _source(args, p), _need(args.epsilon, "--epsilon"), args.lp)
        _emit(formats.dumps(formats.game_to_json(g)), args.out)
    else:
        s = formats.load_strategy(_need(args.strategy, "--strategy"))
        _emit(formats.dumps(formats.evaluation_to_json(p, evaluate(p, s))), args.out)
    return 0


def _show(v):
    return repr(v) if isinstance(v, float) else fmt(v)


def _need(value, flag: str):
    if value is None:
        raise PreconditionError(f"{flag} is required here")
    return value


def cmd_depth(args) -> int:
    p = formats.load_problem(args.problem)
    kinds = ("randomized", "distributional") if args.kind == "both" else (args.kind,)
    doc = {"epsilon": fmt(args.epsilon), "max_T": args.max_T}
    for kind in kinds:
        if kind == "distributional" and p.prior is None:
            doc[kind] = None
            continue
        doc[kind] = worst_case_depth(p, args.epsilon, kind, args.max_T, args.lp)
    _emit(formats.dumps(doc), args.out)
    return 0


def cmd_construct(args) -> int:
    op = args.op
    if op == "mix":
        if len(args.strategies) != 2:
            raise PreconditionError("mix takes exactly two strategy files")
        s1, s2 = (formats.load_strategy(f) for f in args.strategies)
        out = mix(s1, s2, _need(args.w, "--w"))
    else:
        if len(args.strategies) != 1:
            raise PreconditionError(f"{op} takes exactly one strategy file")
        s = formats.load_strategy(args.strategies[0])
        p = formats.load_problem(args.problem) if args.problem else None
        if op == "repeat":
            out = repeat_n(s, _need(args.n, "-n"))
        elif op == "embed":
            p = _need(p, "--problem")
            mode = "average" if args.coordinate is None else args.coordinate
            out = embed_coordinate(p, s, _need(args.n, "-n"), mode)
        elif op == "truncate":
            out = truncate(s, _budget(args, p, s), args.fallback, p)
        else:
            p = _need(p, "--problem")
            fb = formats.load_strategy(_need(args.fallback_strategy, "--fallback-strategy"))
            out = filter_posterior(p, s, _need(args.epsilon, "--epsilon"), fb, args.alpha).strategy
    _emit(formats.dumps(formats.strategy_to_json(out)), args.out)
    return 0


def _budget(args, p, s) -> Budget:
    if args.budget is not None:
        return Budget(args.budget)
    if args.alpha is None or p is None:
        raise PreconditionError("truncate needs --budget, or --alpha with --problem")
    agg = mu_aggregates(p, evaluate(p, s))
    return chebyshev_budget(agg.expectation, sqrt(agg.variance), k_for_alpha(args.alpha))


def cmd_verify(args) -> int:
    name = args.check
    if name == "derandomization":
        p = formats.load_problem(args.problem)
        rep = harness.check_derandomization(p, _need(args.epsilon, "--epsilon"), args.max_T)
    else:
        p = formats.load_problem(args.problem)
        if name == "additivity":
            rep = harness.check_additivity(p, _need(args.epsilon, "--epsilon"), args.n or 2, args.T)
        elif name == "continuity":
            grid = args.grid if args.grid else [_need(args.epsilon, "--epsilon or --grid")]
            rep = harness.check_continuity(p, grid, args.T, args.alpha or 0)
        elif name == "minimax":
            rep = harness.check_minimax(p, _need(args.epsilon, "--epsilon"), args.T, args.lp)
        elif name == "direct-sum":
            rep = harness.check_direct_sum(p, _need(args.epsilon, "--epsilon"), args.n or 2, args.T,
                                           args.kind)
        else:
            s = formats.load_strategy(_need(args.strategy, "--strategy"))
            rep = harness.check_truncation(p, s, args.n or 2, _need(args.alpha, "--alpha"))
    if args.format == "table":
        _emit(rep.table() + "\n", args.out)
    else:
        _emit(formats.dumps(rep.to_dict()), args.out)
    return 1 if rep.status == harness.FAIL else 0


def cmd_examples(args) -> int:
    names = [args.name] if args.name else sorted(BUILTINS)
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for name in names:
            with open(os.path.join(args.out_dir, f"{name}.json"), "w", encoding="utf-8") as fh:
                fh.write(formats.dumps(formats.problem_to_json(BUILTINS[name]())))
        return 0
    if args.name:
        _emit(formats.dumps(formats.problem_to_json(BUILTINS[args.name]())), args.out)
    else:
        doc = {name: formats.problem_to_json(BUILTINS[name]()) for name in names}
        _emit(formats.dumps(doc), args.out)
    return 0


# -- parser -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="oracle-complexity", description="Exact oracle complexity at desk scale.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, problem=True, depth=True):
        if problem:
            sp.add_argument("--problem", required=True, help="problem JSON file")
        if depth:
            sp.add_argument("-T", type=_depth, default=1, help="depth bound (default 1)")
        sp.add_argument("--lp", choices=("exact", "float"), default="exact")
        sp.add_argument("-o", "--out", help="write output here instead of stdout")

    sp = sub.add_parser("solve", help="frontier, distributional value, randomized value, or evaluation")
    common(sp)
    sp.add_argument("--mode", choices=("dist-frontier", "dist-value", "randomized", "evaluate"),
                    default="dist-frontier")
    sp.add_argument("-e", "--epsilon", type=_fraction)
    sp.add_argument("--strategy", help="strategy JSON file (evaluate mode)")
    sp.add_argument("--source", choices=("oracle", "catalog"), default="oracle",
                    help="price columns with the tree oracle or an explicit catalog")
    sp.add_argument("--cap", type=_positive_int, default=None,
                    help="catalog size cap (default from ORACLE_COMPLEXITY_CAP)")
    sp.add_argument("--decimal", type=_depth, default=None, help="render the CSV with k decimals")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("depth", help="worst-case complexities")
    common(sp, depth=False)
    sp.add_argument("-e", "--epsilon", type=_fraction, default=Fraction(0))
    sp.add_argument("--kind", choices=("randomized", "distributional", "both"), default="both")
    sp.add_argument("--max-T", dest="max_T", type=_depth, default=8)
    sp.set_defaults(func=cmd_depth)

    sp = sub.add_parser("construct", help="repeat, embed, truncate, mix or filter strategies")
    sp.add_argument("op", choices=("repeat", "embed", "truncate", "mix", "filter"))
    sp.add_argument("strategies", nargs="+", help="input strategy JSON file(s)")
    sp.add_argument("--problem")
    sp.add_argument("-n", type=_positive_int)
    sp.add_argument("--w", type=_fraction, help="weight of the first strategy (mix)")
    sp.add_argument("--coordinate", type=_positive_int, help="embed at a fixed coordinate")
    sp.add_argument("--budget", type=_depth, help="truncation budget in calls")
    sp.add_argument("--alpha", type=_fraction)
    sp.add_argument("-e", "--epsilon", type=_fraction)
    sp.add_argument("--fallback", help="outcome label emitted when truncating")
    sp.add_argument("--fallback-strategy", help="strategy grafted by filter")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="run a theorem check")
    sp.add_argument("check", choices=CHECKS)
    common(sp)
    sp.add_argument("-e", "--epsilon", type=_fraction)
    sp.add_argument("-n", type=_positive_int)
    sp.add_argument("--alpha", type=_fraction)
    sp.add_argument("--grid", type=_fraction, nargs="+")
    sp.add_argument("--kind", choices=("distributional", "randomized"), default="distributional")
    sp.add_argument("--strategy")
    sp.add_argument("--max-T", dest="max_T", type=_depth, default=None)
    sp.add_argument("--format", choices=("json", "table"), default="json")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("examples", help="emit the built-in problems")
    sp.add_argument("--name", choices=sorted(BUILTINS))
    sp.add_argument("--out-dir")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_examples)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "cap", None) is None and hasattr(args, "cap"):
            args.cap = default_cap()
        return args.func(args)
    except OracleComplexityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:  # pragma: no cover - argparse routes these to error()
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
