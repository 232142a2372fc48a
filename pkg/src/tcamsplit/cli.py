"""Command-line entry point: ``tcamsplit <command> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from typing import List

from .approx import closest
from .experiments import (
    STUDIES,
    EmpiricalModelParams,
    ExperimentConfig,
    predict_error,
    run_study,
    write_csv,
)
from .partition import DistanceKind, OPTIMIZABLE_KINDS, Partition, format_partition, parse_partition
from .sequences import bit_matcher, complexity, format_sequence, niagara
from .tcam import format_table, sequence_to_table


def parse_range(text: str, cast=int) -> List:
    """``5``, ``1,2,8``, ``10:50`` (inclusive) or ``10:50:5``."""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if ":" in chunk:
            bits = chunk.split(":")
            if len(bits) not in (2, 3):
                raise argparse.ArgumentTypeError(f"bad range {chunk!r}")
            lo, hi = cast(bits[0]), cast(bits[1])
            step = cast(bits[2]) if len(bits) == 3 else 1
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            v = lo
            while v <= hi:
                out.append(v)
                v += step
        elif chunk:
            out.append(cast(chunk))
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def _kind(text: str) -> DistanceKind:
    try:
        return DistanceKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _integer_partition(path: str) -> Partition:
    p = parse_partition(_read(path))
    if not isinstance(p, Partition):
        raise SystemExit("this command needs a partition with integer parts")
    return p


def cmd_complexity(args) -> int:
    print(complexity(_integer_partition(args.file)))
    return 0


def cmd_approx(args) -> int:
    P = parse_partition(_read(args.file))
    res = closest(P, args.rules, args.kind)
    print(format_partition(res.approx), end="")
    print(f"error {res.error}")
    print(f"rules {res.rule_count}")
    if res.degenerate:
        print("degenerate: some targets receive no addresses")
    print(format_table(res.table), end="")
    return 0


def cmd_synth(args) -> int:
    P = _integer_partition(args.file)
    seq = niagara(P) if args.algorithm == "niagara" else bit_matcher(P)
    if args.sequence:
        print(format_sequence(seq), end="")
    print(format_table(sequence_to_table(seq, P.k)), end="")
    return 0


def cmd_study(args) -> int:
    cfg = ExperimentConfig(
        study=args.study,
        W=args.W,
        k=args.k,
        n=args.n,
        ratio=args.ratio,
        samples=args.samples,
        seed=args.seed,
        kind=args.kind,
        workers=args.workers,
    )
    counts = None
    if args.counts:
        counts = _read(args.counts).splitlines()
    fractions = [Fraction(f) for f in args.fractions.split(",")]
    fields, rows = run_study(cfg, counts_lines=counts, fractions=fractions)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(fields, rows, fh)
    else:
        write_csv(fields, rows, sys.stdout)
    return 0


def cmd_oracle_check(args) -> int:
    from .oracle import run_oracle_checks

    failures = run_oracle_checks(args.max_w, args.max_k, report=print)
    return 1 if failures else 0


def cmd_predict(args) -> int:
    params = EmpiricalModelParams()
    value = predict_error(args.n, args.k, args.w, params)
    print(f"{value:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcamsplit", description="Prefix-rule traffic splitting compiler.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complexity", help="minimum number of rules for an exact partition")
    p.add_argument("file", help="partition file, '-' for stdin")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("approx", help="closest partition under a rule budget")
    p.add_argument("file")
    p.add_argument("--rules", "-n", type=int, required=True)
    p.add_argument("--kind", type=_kind, default=DistanceKind.LINF,
                   help="|".join(k.value for k in OPTIMIZABLE_KINDS))
    p.set_defaults(func=cmd_approx)

    p = sub.add_parser("synth", help="exact rule table for a partition")
    p.add_argument("file")
    p.add_argument("--algorithm", choices=("bitmatcher", "niagara"), default="bitmatcher")
    p.add_argument("--sequence", action="store_true", help="also print the transaction sequence")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("study", help="run a randomized study and print CSV")
    p.add_argument("--study", choices=STUDIES, required=True)
    p.add_argument("--W", type=parse_range, default=[32])
    p.add_argument("--k", type=parse_range, default=[10])
    p.add_argument("--n", type=parse_range, default=[25])
    p.add_argument("--ratio", type=lambda s: parse_range(s, float), default=[1.0])
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", type=_kind, default=DistanceKind.LINF)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--counts", help="per-frame counts file for the real-data study")
    p.add_argument("--fractions", default="1/4,1/2,3/4,1", help="rule fractions for the real-data study")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("oracle-check", help="compare fast solvers with exhaustive search")
    p.add_argument("--max-w", type=int, default=4)
    p.add_argument("--max-k", type=int, default=3)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("predict", help="empirical model of the expected L-inf error")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
