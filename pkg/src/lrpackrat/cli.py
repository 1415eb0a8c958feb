"""``lrpackrat`` command line: parse, bench, check-grammar.

Exit status: 0 clean parse (or success), 1 parse recovered from errors,
2 grammar, file or usage problem.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .bench import arithmetic_input, bench_linearity, report_csv
from .engine import make_session
from .grammar import GrammarError, left_recursive_rules
from .grammar_text import load_grammar
from .recovery import RecoveryConfig
from .treeio import collect_errors, serialize_tree

EXIT_OK, EXIT_RECOVERED, EXIT_FAILURE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _sizes(s: str) -> list[int]:
    try:
        out = [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {s!r}") from None
    if not out or any(x < 1 for x in out):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise argparse.ArgumentTypeError("sizes must be strictly increasing")
    return out


def _rate(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("error rate must be within [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrpackrat", description="Packrat PEG parser with left recursion and error recovery.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ps = sub.add_parser("parse", help="parse input and print its tree")
    ps.add_argument("-g", "--grammar", required=True)
    src = ps.add_mutually_exclusive_group(required=True)
    src.add_argument("-i", "--input", help="input file; taken as inline text if no such file exists")
    src.add_argument("-t", "--text", help="inline input text")
    ps.add_argument("-f", "--format", choices=("sexpr", "json"), default="sexpr")
    ps.add_argument("--raw", action="store_true", help="print every clause node")
    ps.add_argument("--no-recover", action="store_true", help="skip the recovery phase")
    ps.add_argument("--max-skip", type=_positive_int, default=RecoveryConfig().max_skip)
    ps.add_argument("--backend", choices=("python", "cython"), default=None)

    pb = sub.add_parser("bench", help="linearity benchmark, CSV on stdout")
    pb.add_argument("-g", "--grammar", required=True)
    pb.add_argument("--sizes", type=_sizes, required=True)
    pb.add_argument("--error-rate", type=_rate, default=0.0)
    pb.add_argument("--seed", type=int, default=0)
    pb.add_argument("--backend", choices=("python", "cython"), default=None)

    pc = sub.add_parser("check-grammar", help="validate a grammar file")
    pc.add_argument("-g", "--grammar", required=True)
    return p


def _read_input(args) -> str:
    if args.text is not None:
        return args.text
    if os.path.exists(args.input):
        with open(args.input, encoding="utf-8") as f:
            return f.read()
    return args.input


def _cmd_parse(args, out, err) -> int:
    grammar = load_grammar(args.grammar)
    text = _read_input(args)
    config = RecoveryConfig(max_skip=args.max_skip, enabled=not args.no_recover)
    root = make_session(grammar, text, config, args.backend).parse()
    out.write(serialize_tree(root, args.format, text, raw=args.raw) + "\n")
    errors = collect_errors(root)
    for e in errors:
        snippet = text[e.pos:e.pos + e.len]
        err.write(f"error: {e.kind} at {e.pos} len {e.len} {snippet!r}\n")
    return EXIT_OK if root.is_complete and not errors else EXIT_RECOVERED


def _cmd_bench(args, out, err) -> int:
    grammar = load_grammar(args.grammar)
    report = bench_linearity(grammar, args.sizes, arithmetic_input, args.error_rate,
                             seed=args.seed, backend=args.backend)
    out.write(report_csv(report))
    if len(report.rows) < 3:
        err.write("note: fewer than 3 sizes, no fit reported\n")
    return EXIT_OK


def _cmd_check(args, out, err) -> int:
    grammar = load_grammar(args.grammar)
    lr = left_recursive_rules(grammar)
    out.write(f"{args.grammar}: ok, {len(grammar.names)} rules, {grammar.size} clauses, "
              f"start {grammar.start}\n")
    if lr:
        out.write("left-recursive: " + ", ".join(n for n in grammar.names if n in lr) + "\n")
    return EXIT_OK


_COMMANDS = {"parse": _cmd_parse, "bench": _cmd_bench, "check-grammar": _cmd_check}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as e:
        err.write(f"{e}\n")
        return EXIT_FAILURE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_FAILURE
    try:
        return _COMMANDS[args.command](args, out, err)
    except GrammarError as e:
        err.write(f"grammar error: {e}\n")
    except OSError as e:
        err.write(f"cannot read {e.filename}: {e.strerror}\n")
    except (ValueError, UnicodeDecodeError) as e:
        err.write(f"error: {e}\n")
    return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
