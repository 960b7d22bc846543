"""Command-line front end.

Exit codes: 0 success (or pass/open), 1 verification failure or resource
limit, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import formula, harness
from .engine import PositionError, Ruleset, format_position, parse_piles, parse_position
from .play import play
from .solver import (
    BoundSpec,
    ResourceLimitError,
    format_table,
    retrograde_fill,
    shared_solver,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("amalgam_nim")


class UsageError(Exception):
    pass


def _add_rules(p: argparse.ArgumentParser, default: str | None = "restricted") -> None:
    p.add_argument(
        "--rules",
        choices=("classic", "amalgamation", "restricted"),
        default=default,
        help="move rules (default: %(default)s)",
    )
    p.add_argument("--threshold", type=int, default=2, help="merge threshold for restricted rules")


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _pos_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amalgam-nim",
        description="Solver and verifier for Nim with (restricted) pile amalgamation.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="closed-form P/N of a 3-pile restricted position")
    p.add_argument("--pos", required=True, help="pile sizes, e.g. 3,5,7")

    for name, what in (("solve", "P/N outcome"), ("grundy", "Grundy value")):
        p = sub.add_parser(name, help=f"{what} by exhaustive search")
        p.add_argument("--pos", required=True, help="pile sizes, e.g. 3,5,7")
        _add_rules(p)

    p = sub.add_parser("verify", help="run a verification sweep")
    p.add_argument(
        "check",
        choices=(
            "theorem",
            "lemmas",
            "lemma-structure",
            "lemma-transitions",
            "two-pile",
            "conjecture",
        ),
    )
    p.add_argument("--max-total", type=_nonneg, help="bound on total stones")
    p.add_argument("--max-pile", type=_nonneg, help="bound on each pile")
    p.add_argument("--max", type=_nonneg, help="largest pile for the two-pile check")
    p.add_argument("--digit-limit", type=_nonneg, help="largest pile for the digit-relation sweep")
    p.add_argument("--workers", type=_pos_int, default=1, help="worker processes")
    p.add_argument(
        "--max-counterexamples",
        type=_nonneg,
        default=harness.DEFAULT_MAX_COUNTEREXAMPLES,
        help="cap on listed counterexamples per report",
    )
    p.add_argument("--out", help="write the report to this file")
    p.add_argument("--format", choices=("json", "text"), help="report format")

    p = sub.add_parser("table", help="export a Grundy table or a P-position list")
    _add_rules(p)
    p.add_argument("--max-total", type=_nonneg, help="bound on total stones")
    p.add_argument("--max-pile", type=_nonneg, help="bound on each pile")
    p.add_argument("--piles", type=_pos_int, default=3, help="number of piles")
    p.add_argument("--csv", help="output file (default: stdout)")
    p.add_argument(
        "--ppositions",
        action="store_true",
        help="list 3-pile unrestricted P-positions with one small heap",
    )
    p.add_argument("--small-max", type=_nonneg, default=7, help="largest small heap")
    p.add_argument("--max", type=_nonneg, default=40, help="largest other heap")

    p = sub.add_parser("play", help="play against the engine")
    p.add_argument("--pos", required=True, help="starting piles, e.g. 3,5,7")
    _add_rules(p)
    return parser


def _rules(args) -> Ruleset:
    try:
        return Ruleset.parse(args.rules, args.threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _position(text: str):
    try:
        return parse_position(text)
    except PositionError as exc:
        raise UsageError(str(exc)) from None


def cmd_classify(args) -> int:
    p = _position(args.pos)
    try:
        m = formula.membership(p)
    except PositionError as exc:
        raise UsageError(str(exc)) from None
    outcome = "P" if m.is_p else "N"
    print(f"{outcome} ({m.describe()})")
    if m.orientation is not None:
        print(f"orientation (x,y,z) = ({format_position(m.orientation)})")
    return EXIT_OK


def cmd_solve(args) -> int:
    p = _position(args.pos)
    print(shared_solver(_rules(args)).outcome(p).value)
    return EXIT_OK


def cmd_grundy(args) -> int:
    p = _position(args.pos)
    print(shared_solver(_rules(args)).grundy(p))
    return EXIT_OK


def _one_bound(args, default: BoundSpec, allow_pile: bool = True, allow_total: bool = True):
    if args.max_total is not None and args.max_pile is not None:
        raise UsageError("give at most one of --max-total and --max-pile")
    if args.max_total is not None:
        if not allow_total:
            raise UsageError(f"{args.check} takes --max-pile, not --max-total")
        return BoundSpec.total_stones(args.max_total)
    if args.max_pile is not None:
        if not allow_pile:
            raise UsageError(f"{args.check} needs a move-closed --max-total bound")
        return BoundSpec.max_pile(args.max_pile)
    return default


def _plan_verify(args):
    """Validate flags and return a list of zero-argument sweep callables."""
    check = args.check
    cap, workers = args.max_counterexamples, args.workers
    if check != "two-pile" and args.max is not None:
        raise UsageError("--max only applies to the two-pile check")
    if check not in ("lemmas", "lemma-structure") and args.digit_limit is not None:
        raise UsageError("--digit-limit only applies to the lemma checks")

    def structure(bound):
        digit = harness.DEFAULT_DIGIT_LIMIT if args.digit_limit is None else args.digit_limit
        return lambda: harness.verify_lemma_structure(bound, digit, workers, cap)

    if check == "theorem":
        b = _one_bound(args, harness.DEFAULT_THEOREM_BOUND)
        return [lambda: harness.verify_main_theorem(b, workers, cap)]
    if check == "two-pile":
        if args.max_total is not None or args.max_pile is not None:
            raise UsageError("two-pile takes --max")
        m = harness.DEFAULT_TWO_PILE_MAX if args.max is None else args.max
        return [lambda: harness.verify_two_pile(m, cap)]
    if check == "conjecture":
        b = _one_bound(args, harness.DEFAULT_CONJECTURE_BOUND)
        return [lambda: harness.check_conjecture(b, cap)]
    if check == "lemma-structure":
        b = _one_bound(args, harness.DEFAULT_LEMMA_STRUCTURE_BOUND, allow_total=False)
        return [structure(b)]
    if check == "lemma-transitions":
        b = _one_bound(args, harness.DEFAULT_TRANSITION_BOUND, allow_pile=False)
        return [lambda: harness.verify_lemma_transitions(b, workers, cap)]
    # lemmas: structure on --max-pile, transitions on --max-total
    sb = harness.DEFAULT_LEMMA_STRUCTURE_BOUND
    tb = harness.DEFAULT_TRANSITION_BOUND
    if args.max_pile is not None:
        sb = BoundSpec.max_pile(args.max_pile)
    if args.max_total is not None:
        tb = BoundSpec.total_stones(args.max_total)
    return [structure(sb), lambda: harness.verify_lemma_transitions(tb, workers, cap)]


def cmd_verify(args) -> int:
    sweeps = _plan_verify(args)
    reports = [run() for run in sweeps]
    for r in reports:
        log.info("%s finished in %d ms", r.check, r.elapsed_ms)
    if args.out:
        fmt = args.format or "json"
        harness.write_report(reports, args.out, fmt)
        sys.stdout.write(harness.format_reports(reports, "text", timing=False))
    else:
        sys.stdout.write(harness.format_reports(reports, args.format or "text", timing=False))
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


def cmd_table(args) -> int:
    rules = _rules(args)
    if args.ppositions:
        if rules.kind.value != "amalgamation":
            raise UsageError("--ppositions lists unrestricted amalgamation positions; use --rules amalgamation")
        if args.max_total is not None or args.max_pile is not None:
            raise UsageError("--ppositions takes --small-max and --max")
        rows = harness.emit_unrestricted_table(args.small_max, args.max)
        text = harness.format_unrestricted_table(rows, args.small_max, args.max)
    else:
        if (args.max_total is None) == (args.max_pile is None):
            raise UsageError("give exactly one of --max-total and --max-pile")
        if args.max_total is not None:
            bound = BoundSpec.total_stones(args.max_total, args.piles)
        else:
            bound = BoundSpec.max_pile(args.max_pile, args.piles)
        text = format_table(retrograde_fill(bound, rules))
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_play(args) -> int:
    rules = _rules(args)
    try:
        piles = parse_piles(args.pos)
    except PositionError as exc:
        raise UsageError(str(exc)) from None
    return play(piles, rules, sys.stdin, sys.stdout)


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "grundy": cmd_grundy,
    "verify": cmd_verify,
    "table": cmd_table,
    "play": cmd_play,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"amalgam-nim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"amalgam-nim {args.command}: resource limit: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except harness.OracleInconsistency as exc:
        print(f"amalgam-nim {args.command}: oracle inconsistency: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"amalgam-nim {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
