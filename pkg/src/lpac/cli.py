"""Command-line entry point: ``lpac check|compress|gen|stats``.

Exit codes: 0 accepted, 1 rejected or target not derived, 2 unreadable or
unparsable input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .checker import Status, run_check
from .errors import IllFormedFragment, ParseError
from .format import iter_steps, parse_axioms, parse_proof, parse_target, serialize
from .genbench import FLAVORS, ChainSpec, generate_chain
from .miner import AlreadyCompressed, FragmentationConfig, compress_with_report
from .stats import StatsReport, table_header, table_row

EXIT_OK, EXIT_REJECTED, EXIT_INPUT = 0, 1, 2


def _color_enabled() -> bool:
    return os.environ.get("LPAC_COLOR", "0") == "1"


def _paint(text: str, code: str) -> str:
    return f"\033[{code}m{text}\033[0m" if _color_enabled() else text


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_axioms(path: str | None):
    return parse_axioms(_read(path), path) if path else None


def _load_target(path: str | None):
    return parse_target(_read(path), path) if path else None


def _check_one(path: str, args, axioms, target) -> int:
    mode = "debug" if args.debug else "strict"
    with open(path, encoding="utf-8") as fh:
        verdict = run_check(
            axioms,
            iter_steps(fh, path),
            target,
            mode,
            allow_input_outputs=args.allow_input_outputs,
        )
    verdict.stats.file_bytes = os.path.getsize(path)
    for w in verdict.warnings:
        print(f"{path}: warning: {w}", file=sys.stderr)

    if verdict.status is Status.ACCEPTED:
        hit = f", target derived at {verdict.target_hit}" if verdict.target_hit else ""
        print(f"{path}: {_paint('ACCEPTED', '32')}{hit}")
        code = EXIT_OK
    elif verdict.status is Status.TARGET_NOT_FOUND:
        print(f"{path}: {_paint('REJECTED', '31')}: all steps valid but the target was not derived")
        code = EXIT_REJECTED
    else:
        f = verdict.failed_step
        line = f.line if f.line is not None else "?"
        print(f"{path}: {_paint('REJECTED', '31')} at line {line} (step {f.index})")
        src = f.span.source if f.span and f.span.source else path
        msg = f"{src}: line {line}: step {f.index}: {f.code}: {f.reason}"
        print(_paint(msg, "31"), file=sys.stderr)
        code = EXIT_REJECTED

    if args.stats:
        print(table_header())
        print(table_row(os.path.basename(path), verdict.stats))
    if args.machine:
        print(verdict.summary_line(), file=sys.stderr)
    return code


def cmd_check(args) -> int:
    try:
        axioms = _load_axioms(args.axioms)
        target = _load_target(args.target)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    worst = EXIT_OK
    for path in args.proof:
        try:
            code = _check_one(path, args, axioms, target)
        except (OSError, ParseError) as exc:
            print(f"{path}: error: {exc}", file=sys.stderr)
            if args.machine:
                line = exc.span.line if isinstance(exc, ParseError) and exc.span else "-"
                print(f"STATUS=rejected STEP=- LINE={line}", file=sys.stderr)
            code = EXIT_INPUT
        worst = max(worst, code)
    return worst


def cmd_compress(args) -> int:
    try:
        doc = parse_proof(_read(args.proof), args.proof)
        axioms = _load_axioms(args.axioms)
        target = _load_target(args.target)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = FragmentationConfig(min_repeats=args.min_repeats, window=args.window)
    try:
        out, report = compress_with_report(doc, config, axioms=axioms, target=target)
    except (AlreadyCompressed, IllFormedFragment) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(serialize(out))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report.to_jsonl())
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        spec = ChainSpec(args.blocks, args.arity, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    name = args.name or f"chain{args.blocks}_{args.flavor}"
    try:
        paths = generate_chain(spec, args.flavor).write(args.out, name)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for kind in ("axioms", "target", "proof"):
        print(paths[kind])
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        doc = parse_proof(_read(args.proof), args.proof)
        axioms = _load_axioms(args.axioms)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = StatsReport.of(doc.steps)
    if axioms is not None:
        report.axiom_count += len(axioms.steps)
    report.file_bytes = os.path.getsize(args.proof)
    print(table_header())
    print(table_row(os.path.basename(args.proof), report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and details")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="check proof files")
    p.add_argument("proof", nargs="+", help="proof file(s)")
    p.add_argument("--axioms", help="axiom file (A steps only)")
    p.add_argument("--target", help="target file: a single '<poly> ;'")
    p.add_argument("--stats", action="store_true", help="print a statistics row")
    p.add_argument("--debug", action="store_true", help="keep pattern bodies and replay them")
    p.add_argument("--machine", action="store_true", help="one-line summary on stderr")
    p.add_argument(
        "--allow-input-outputs",
        action="store_true",
        help="let pattern outputs name pattern inputs",
    )
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compress", help="replace repeated fragments by patterns")
    p.add_argument("proof")
    p.add_argument("out")
    p.add_argument("--axioms", help="axiom file, needed when fragments read axioms")
    p.add_argument("--target", help="target file; conclusions equal to it are kept")
    p.add_argument("--min-repeats", type=int, default=2)
    p.add_argument("--window", type=int, default=8)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("gen", help="generate a benchmark chain")
    p.add_argument("kind", choices=["chain"])
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--flavor", choices=FLAVORS, default="pattern")
    p.add_argument("--arity", type=int, default=2, help="inputs per block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stats", help="count steps of a proof file")
    p.add_argument("proof")
    p.add_argument("--axioms")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
