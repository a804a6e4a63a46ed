"""Command line front end: gen, analyze, report, verify.

Exit codes: 0 ok, 1 verification mismatch, 2 usage error, 3 invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analyzer
from .attribution import DEFAULT_MIN_SIZE, EngineConfig, ParallelRefused, run, run_parallel
from .synth import (
    KINDS, ParameterError, diff_summaries, dumps_truth, generate, loads_truth,
    oracle_attribute, summarize,
)
from .synth import generator as gen
from .trace import MetricKind, TraceError, dump_trace, load_trace

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INVALID = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def truth_path(trace_path) -> Path:
    p = Path(trace_path)
    return p.with_name(p.name.split(".")[0] + ".truth.json")


def _scenario(args) -> gen.Scenario:
    common = {"seed": args.seed}
    for name in ("threads", "samples", "keep", "rate"):
        v = getattr(args, name)
        if v is not None:
            common[name] = v
    extra = {}
    for item in args.param or []:
        key, _, raw = item.partition("=")
        if not key or not raw:
            raise ParameterError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            extra[key] = json.loads(raw)
        except json.JSONDecodeError:
            extra[key] = raw
    try:
        return gen.SCENARIOS[args.scenario](**common, **extra)
    except TypeError as exc:
        raise ParameterError(str(exc)) from None


def cmd_gen(args) -> int:
    try:
        sc = _scenario(args)
        events, truth = generate(sc)
    except ParameterError as exc:
        print(f"gen: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    dump_trace(events, out, args.format)
    truth_path(out).write_bytes(dumps_truth(truth, sc))
    print(f"wrote {len(events)} events to {out} and truth to {truth_path(out)}")
    return EXIT_OK


def _load(path):
    try:
        return load_trace(path)
    except (TraceError, OSError) as exc:
        print(f"invalid trace {path}: {exc}", file=sys.stderr)
        return None


def _config(args) -> EngineConfig:
    return EngineConfig(min_size=args.min_size, attach_mode=args.attach_mode,
                        epoch_fallback=not getattr(args, "no_epoch_fallback", False))


def cmd_analyze(args) -> int:
    events = _load(args.trace)
    if events is None:
        return EXIT_INVALID
    config = _config(args)
    if args.parallel:
        try:
            profiles = run_parallel(events, config, workers=args.parallel)
        except ParallelRefused as exc:
            print(f"analyze: parallel replay refused: {exc}", file=sys.stderr)
            return EXIT_INVALID
    else:
        profiles = run(events, config)
    merged = analyzer.merge_profiles(profiles)
    data = analyzer.dumps_profile(merged)
    if args.out == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).write_bytes(data)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        kind = MetricKind(args.metric)
    except ValueError:
        print(f"report: unknown metric {args.metric!r}; expected one of "
              f"{[k.value for k in MetricKind]}", file=sys.stderr)
        return EXIT_USAGE
    if args.top < 1:
        print("report: --top must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        merged = analyzer.loads_profile(Path(args.profile).read_bytes())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"report: cannot read profile {args.profile}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.numa:
        report = analyzer.numa_report(merged, args.top)
    else:
        report = analyzer.rank(merged, kind, args.top)
    sys.stdout.buffer.write(analyzer.render(report, "json" if args.json else "text"))
    return EXIT_OK


def cmd_verify(args) -> int:
    events = _load(args.trace)
    if events is None:
        return EXIT_INVALID
    config = _config(args)
    engine = summarize(analyzer.merge_profiles(run(events, config)))
    # the oracle always runs the reference semantics
    oracle = oracle_attribute(events, EngineConfig(args.min_size, args.attach_mode))
    diffs = diff_summaries(engine, oracle)
    if args.truth:
        try:
            truth = loads_truth(Path(args.truth).read_bytes())
        except (OSError, ValueError, KeyError) as exc:
            print(f"verify: cannot read truth {args.truth}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        diffs += diff_summaries(engine, truth.summary, "engine", "truth")
    if diffs:
        print(f"FAIL: {len(diffs)} difference(s)")
        for line in diffs:
            print(f"  {line}")
        return EXIT_MISMATCH
    print(f"PASS: {len(engine.sites)} sites, {len(events)} events")
    return EXIT_OK


def _nonneg(raw: str) -> int:
    v = int(raw)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="objprof", description="Object-centric memory profile replay.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic trace and its ground truth")
    g.add_argument("--scenario", required=True, choices=KINDS)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=("ndjson", "binary"), default="ndjson")
    g.add_argument("--threads", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("--keep", type=float, help="subsampling keep probability")
    g.add_argument("--rate", type=float, help="samples per thread per virtual second")
    g.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="scenario parameter, e.g. share=0.21 or hot_share=0.755")
    g.set_defaults(func=cmd_gen)

    def engine_flags(sp):
        sp.add_argument("trace")
        sp.add_argument("--min-size", type=_nonneg, default=DEFAULT_MIN_SIZE)
        sp.add_argument("--attach-mode", action="store_true")

    a = sub.add_parser("analyze", help="replay a trace into a merged profile")
    engine_flags(a)
    a.add_argument("--out", required=True)
    a.add_argument("--parallel", type=int, nargs="?", const=4, default=0, metavar="WORKERS")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("report", help="rank objects in a profile")
    r.add_argument("profile")
    r.add_argument("--metric", default=MetricKind.L1_MISS.value)
    r.add_argument("--top", type=int, default=10)
    r.add_argument("--numa", action="store_true")
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", help="diff the engine against the oracle (and truth)")
    engine_flags(v)
    v.add_argument("--truth")
    v.add_argument("--no-epoch-fallback", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
