"""Command-line frontend.

    protoforge synth --spec S.pspec --config S.cfg [-o OUT] [flags]
    protoforge synth --spec S.pspec --config S.cfg --check-only
    protoforge corpus [FILTER]

Exit codes: 0 solved (or check passed), 1 check failed or runtime error,
2 exhausted, 3 timed out, 4 unrealizable, 64 bad usage or input.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cegis import report_stats, synthesize
from .checker import format_counterexample, verify
from .config import load_config, synthesis_config
from .errors import (ArityMismatch, MissingHole, ParseError, ProtoforgeError,
                     StateSpaceLimitExceeded, UnboundedType, ValidationError)
from .sketch import apply_completion, completion_text, parse_sketch, serialize_protocol

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CODES = {"solved": 0, "exhausted": 2, "timeout": 3, "unrealizable": 4}
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="protoforge", description="Complete protocol sketches by enumerative CEGIS.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="log progress (repeat for more)")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize a completion for a sketch")
    s.add_argument("--spec", required=True, type=Path, help="sketch file (.pspec)")
    s.add_argument("--config", required=True, type=Path, help="configuration file (.cfg)")
    s.add_argument("-o", "--output", type=Path, help="write the completed protocol here")
    s.add_argument("--strategy", choices=("naive", "cached"))
    s.add_argument("--no-equiv-reduction", dest="reduce", action="store_false", default=None,
                   help="keep semantically equivalent expressions")
    s.add_argument("--no-shortcircuit", dest="shortcircuit", action="store_false", default=None,
                   help="build both argument orders of commutative operators")
    s.add_argument("--timeout", type=float, metavar="SECS")
    s.add_argument("--state-cap", type=int, metavar="N")
    s.add_argument("--max-size", type=int, metavar="K", help="bound on the combined completion size")
    s.add_argument("--extra-check", dest="extra_check", action=argparse.BooleanOptionalAction,
                   default=None, help="re-check solutions on the extra instances")
    s.add_argument("--stats", type=Path, metavar="PATH", help="write key=value statistics here")
    s.add_argument("--check-only", action="store_true",
                   help="model check only; holes are filled from the config's ground truth")
    s.add_argument("--seed", type=int, help="accepted and ignored; runs are deterministic")

    c = sub.add_parser("corpus", help="run the bundled benchmark corpus")
    c.add_argument("filter", nargs="?", help="case name, name prefix or family")
    c.add_argument("--timeout", type=float, metavar="SECS")
    return ap


def _validate(args):
    if args.strategy == "naive":
        if args.reduce is False:
            raise UsageError("--no-equiv-reduction is redundant with --strategy naive")
        if args.shortcircuit is False:
            raise UsageError("--no-shortcircuit is redundant with --strategy naive")
    for name in ("timeout", "state_cap", "max_size"):
        v = getattr(args, name)
        if v is not None and v <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    for p in (args.spec, args.config):
        if not p.is_file():
            raise UsageError(f"no such file: {p}")


def _load(args):
    sk = parse_sketch(args.spec.read_text())
    loaded = load_config(args.config, sk)
    if args.extra_check is not None:
        loaded.options["extra_check"] = args.extra_check
    return sk, loaded


def _check_only(sk, loaded, out) -> int:
    if sk.holes:
        if not loaded.ground_truth:
            raise UsageError("--check-only needs a hole-free protocol or a [ground_truth] section")
        sk = apply_completion(sk, loaded.ground_truth)
    insts = [loaded.instance]
    if loaded.options.get("extra_check", True):
        insts += loaded.extra_instances
    status = EXIT_OK
    for inst in insts:
        rep = verify(sk, inst, int_bounds=loaded.int_bounds)
        out.write(f"{inst.describe()}: {rep.verdict}, {rep.states_explored} states, "
                  f"{rep.check_time:.3f} s\n")
        if not rep.passed:
            out.write(format_counterexample(rep.counterexample) + "\n")
            status = EXIT_FAIL
            break
    return status


def _synth(args, out) -> int:
    _validate(args)
    sk, loaded = _load(args)
    if args.check_only:
        return _check_only(sk, loaded, out)
    cfg = synthesis_config(loaded, strategy=args.strategy, reduce=args.reduce,
                           shortcircuit=args.shortcircuit, timeout=args.timeout,
                           state_cap=args.state_cap, max_combined_size=args.max_size)
    result = synthesize(sk, cfg)
    stats_text = report_stats(result.stats, result.kind)
    if args.stats is not None:
        args.stats.write_text(stats_text)
    if result.kind == "solved":
        text = serialize_protocol(result.protocol)
        if args.output is not None:
            args.output.write_text(text)
        else:
            out.write(text)
        sys.stderr.write("solved:\n" + completion_text(result.completion) + "\n")
    elif result.kind == "unrealizable":
        sys.stderr.write("unrealizable: no completion avoids this run\n")
        sys.stderr.write(format_counterexample(result.run) + "\n")
    else:
        sys.stderr.write(f"{result.kind}: no completion found\n")
    sys.stderr.write(stats_text)
    return EXIT_CODES[result.kind]


def _corpus(args, out) -> int:
    from .corpus import cases, run_corpus
    if not cases(args.filter):
        raise UsageError(f"no corpus case matches {args.filter!r}")
    results, ok = run_corpus(args.filter, out=out, timeout=args.timeout)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    out = sys.stdout
    try:
        if args.command == "synth":
            return _synth(args, out)
        return _corpus(args, out)
    except UsageError as exc:
        sys.stderr.write(f"protoforge: usage error: {exc}\n")
        return EXIT_USAGE
    except StateSpaceLimitExceeded as exc:
        cand = f" (candidate {exc.candidate!r})" if getattr(exc, "candidate", None) else ""
        sys.stderr.write(f"protoforge: {exc}{cand}\n")
        return EXIT_FAIL
    except (ParseError, ValidationError, MissingHole, ArityMismatch, UnboundedType,
            FileNotFoundError) as exc:
        # parse and config errors carry their line/column in the message
        sys.stderr.write(f"protoforge: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except (ProtoforgeError, OSError) as exc:
        sys.stderr.write(f"protoforge: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
