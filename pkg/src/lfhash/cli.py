"""Command-line driver: ``lfhash model|stress|bench|lin``.

Exit status is 0 when every check passed, 1 when a violation was found and
2 for usage errors. Every command can write a JSON report; the path comes
from ``--report`` or, failing that, the ``LFHASH_REPORT`` environment
variable. ``--config FILE`` supplies defaults for any flag from a JSON
object keyed by flag name (``{"steps": 500, "p": 3}``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Sequence

from . import explorer
from . import invariants as inv
from .errors import ConstraintError, ProtocolViolation
from .linearizability import History, HistoryError, WindowTooLarge, check_history
from .model import ModelConfig, init
from .stress import parse_mix, run_bench, run_stress, run_windows

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
SCHEMA_VERSION = explorer.SCHEMA_VERSION


class UsageError(Exception):
    pass


def _emit(report: dict, args: argparse.Namespace) -> None:
    report.setdefault("schema", SCHEMA_VERSION)
    path = args.report or os.environ.get("LFHASH_REPORT")
    text = json.dumps(report, indent=2, default=_jsonable)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    if not args.quiet:
        print(text)


def _jsonable(o):
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if isinstance(o, tuple):
        return list(o)
    return repr(o)


# ---------------------------------------------------------------------------
# model


def _model_config(args) -> ModelConfig:
    if args.p < 1:
        raise UsageError("--p must be at least 1")
    try:
        return ModelConfig(
            processes=args.p,
            initial_size=args.size,
            initial_bound=args.bound,
            sizing=args.sizing,
            mixer=args.mixer,
        )
    except (ConstraintError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _scripts(args) -> dict[int, list] | None:
    found = {}
    for p, text in ((1, args.script_a), (2, args.script_b)):
        if text is not None:
            try:
                found[p] = explorer.parse_script(text)
            except ValueError as exc:
                raise UsageError(f"bad script: {exc}") from exc
    return found or None


def cmd_model(args) -> int:
    if args.list_scenarios:
        for r in explorer.RACES.values():
            print(f"{r.name:14s} {r.summary}")
        return EXIT_OK
    subset = [x for x in args.invariants.split(",") if x] if args.invariants else None
    try:
        inv.resolve(subset)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    if args.scenario:
        return _model_scenarios(args, subset)
    config = _model_config(args)
    scripts = _scripts(args)
    if scripts and max(scripts) > config.processes:
        raise UsageError("--script-b needs --p 2 or more")
    if args.exhaustive:
        return _model_exhaustive(args, config, scripts, subset)
    started = time.perf_counter()
    suite = explorer.SuiteReport(config.to_json())
    traces = []
    for seed in range(args.seed, args.seed + args.runs):
        r = explorer.run_random(
            config,
            seed=seed,
            max_steps=args.steps,
            scripts=scripts,
            check_every=args.check_every,
            mode=args.mode,
            subset=subset,
            choice_policy=args.choices,
            progress=args.progress,
        )
        suite.add(r)
        if r.findings and r.trace:
            traces.append((seed, r.trace))
    suite.wallclock = time.perf_counter() - started
    report = suite.to_json()
    if args.trace and traces:
        with open(args.trace, "w") as fh:
            for seed, lines in traces:
                fh.write(f"# seed {seed}\n")
                fh.write("\n".join(lines) + "\n")
    _emit(report, args)
    return EXIT_OK if suite.ok else EXIT_VIOLATION


def _model_exhaustive(args, config, scripts, subset) -> int:
    if not scripts:
        raise UsageError("--exhaustive needs --script-a/--script-b or --scenario")
    limit = args.max_labels
    try:
        r = explorer.run_exhaustive(
            init(config),
            scripts=scripts,
            limits={p: limit for p in range(1, config.processes + 1)},
            subset=subset,
            budget=args.budget,
            name="scripts",
        )
    except explorer.BudgetExceeded as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    report = r.to_json()
    report["config"] = config.to_json()
    _emit(report, args)
    return EXIT_OK if r.ok else EXIT_VIOLATION


def _model_scenarios(args, subset) -> int:
    names = list(explorer.RACES) if args.scenario == "all" else args.scenario.split(",")
    unknown = [n for n in names if n not in explorer.RACES]
    if unknown:
        raise UsageError(f"unknown scenario(s): {', '.join(unknown)}")
    out, ok = [], True
    for n in names:
        try:
            r = explorer.RACES[n].run(budget=args.budget, subset=subset)
        except explorer.BudgetExceeded as exc:
            print(f"aborted: {exc}", file=sys.stderr)
            return EXIT_VIOLATION
        ok = ok and r.ok and r.contested > 0
        out.append(r.to_json())
    _emit({"kind": "scenarios", "ok": ok, "scenarios": out}, args)
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# stress / lin / bench


def _mix(text: str | None):
    if text is None:
        return None
    try:
        return parse_mix(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_stress(args) -> int:
    mix = _mix(args.mix)
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    if args.processes is not None and args.processes < args.threads:
        raise UsageError("--processes must be at least --threads")
    try:
        if args.history:
            r = run_windows(
                threads=args.threads,
                windows=args.windows,
                ops_per_window=args.window_ops,
                hot_addresses=args.hot,
                initial_bound=args.bound if args.bound is not None else 1,
                seed=args.seed,
                mix=mix,
                history_path=args.history_file,
                preempt=not args.no_preempt,
            )
        else:
            r = run_stress(
                args.threads,
                args.ops,
                mix=mix,
                addresses=args.addresses,
                initial_size=args.size,
                initial_bound=args.bound,
                processes=args.processes,
                seed=args.seed,
                sizing=args.sizing,
                preempt=args.preempt,
            )
    except ConstraintError as exc:
        raise UsageError(str(exc)) from exc
    except ProtocolViolation as exc:
        _emit({"kind": "stress", "ok": False, "violations": [str(exc)]}, args)
        return EXIT_VIOLATION
    report = r.to_json()
    report["kind"] = "stress-history" if args.history else "stress"
    _emit(report, args)
    return EXIT_OK if r.ok else EXIT_VIOLATION


def cmd_lin(args) -> int:
    try:
        h = History.load(args.history_file)
        r = check_history(h, limit=args.window)
    except (OSError, ValueError, KeyError) as exc:
        if isinstance(exc, (HistoryError, WindowTooLarge)):
            _emit({"kind": "lin", "ok": False, "error": str(exc)}, args)
            return EXIT_VIOLATION
        raise UsageError(f"cannot read history: {exc}") from exc
    report = r.to_json()
    report["kind"] = "lin"
    _emit(report, args)
    return EXIT_OK if r.ok else EXIT_VIOLATION


def cmd_bench(args) -> int:
    try:
        counts = [int(x) for x in args.threads.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --threads list: {args.threads!r}") from exc
    if any(n < 1 for n in counts):
        raise UsageError("thread counts must be positive")
    rows = run_bench(counts, args.duration, mix=_mix(args.mix), addresses=args.addresses, preload=args.preload, seed=args.seed)
    if not args.quiet:
        print(f"{'threads':>7} {'ops':>10} {'seconds':>8} {'ops/s':>10} {'migrations':>10}", file=sys.stderr)
        for row in rows:
            print(
                f"{row['threads']:>7} {row['ops']:>10} {row['seconds']:>8} "
                f"{row['ops_per_sec']:>10} {row['migrations']:>10}",
                file=sys.stderr,
            )
    _emit({"kind": "bench", "ok": True, "rows": rows}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", help="write the JSON report here (default: $LFHASH_REPORT)")
    common.add_argument("--config", help="JSON file with flag defaults")
    common.add_argument("--quiet", action="store_true", help="do not print the report")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="lfhash", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    m = sub.add_parser("model", parents=[common], help="explore the transition model")
    m.add_argument("--p", type=int, default=2, help="number of processes")
    m.add_argument("--size", type=int, default=8, help="initial table size")
    m.add_argument("--bound", type=int, default=3, help="initial table bound")
    m.add_argument("--sizing", choices=("pow2", "tight"), default="pow2")
    m.add_argument("--mixer", choices=("default", "identity"), default="default")
    m.add_argument("--steps", type=int, default=2000)
    m.add_argument("--runs", type=int, default=1, help="seeds seed..seed+runs-1")
    m.add_argument("--check-every", type=int, default=1)
    m.add_argument("--mode", choices=("uniform", "adversarial"), default="uniform")
    m.add_argument("--choices", choices=("random", "default"), default="random",
                   help="slot choice policy at labels 78 and 111")
    m.add_argument("--progress", choices=("full", "enabled", "off"), default="full")
    m.add_argument("--invariants", help="comma-separated invariant ids or families")
    m.add_argument("--trace", help="write step traces of failing runs here")
    m.add_argument("--exhaustive", action="store_true")
    m.add_argument("--script-a", help="ops for process 1, e.g. 'insert:3:1,find:3'")
    m.add_argument("--script-b", help="ops for process 2")
    m.add_argument("--max-labels", type=int, default=40, help="per-process step cap for --exhaustive")
    m.add_argument("--scenario", help="race scenario name(s), comma-separated, or 'all'")
    m.add_argument("--list-scenarios", action="store_true")
    m.add_argument("--budget", type=int, default=200_000, help="state budget for exhaustive runs")
    m.set_defaults(func=cmd_model)

    s = sub.add_parser("stress", parents=[common], help="hammer the live map with threads")
    s.add_argument("--threads", type=int, default=4)
    s.add_argument("--processes", type=int, help="registered process count (default: threads)")
    s.add_argument("--ops", type=int, default=100_000, help="operations per thread")
    s.add_argument("--mix", help="weights, e.g. 'find=50,insert=20,delete=20,assign=10'")
    s.add_argument("--addresses", type=int, default=256)
    s.add_argument("--size", type=int, default=32)
    s.add_argument("--bound", type=int, help="initial bound override")
    s.add_argument("--sizing", choices=("pow2", "tight"), default="pow2")
    s.add_argument("--preempt", action="store_true", help="yield at every shared step")
    s.add_argument("--history", action="store_true", help="record windows and check linearizability")
    s.add_argument("--no-preempt", action="store_true", help="with --history: do not yield at shared steps")
    s.add_argument("--windows", type=int, default=1000)
    s.add_argument("--window-ops", type=int, default=8)
    s.add_argument("--hot", type=int, default=2, help="hot addresses for --history")
    s.add_argument("--history-file", help="with --history: dump events as JSON lines")
    s.set_defaults(func=cmd_stress)

    b = sub.add_parser("bench", parents=[common], help="throughput per thread count (informational)")
    b.add_argument("--threads", default="1,2,4", help="comma-separated thread counts")
    b.add_argument("--duration", type=float, default=1.0, help="seconds per row")
    b.add_argument("--mix", help="weights (default: 90%% find)")
    b.add_argument("--addresses", type=int, default=1024)
    b.add_argument("--preload", type=int, default=512)
    b.set_defaults(func=cmd_bench)

    lin = sub.add_parser("lin", parents=[common], help="check a recorded history file")
    lin.add_argument("history_file")
    lin.add_argument("--window", type=int, default=8, help="max operations per quiescent window")
    lin.set_defaults(func=cmd_lin)
    ap.set_defaults(_commands={"model": m, "stress": s, "bench": b, "lin": lin})
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        ap.error(f"cannot read config: {exc}")
    if not isinstance(data, dict):
        ap.error("config file must hold a JSON object")
    sub = args._commands[args.command]
    known = {a.dest for a in sub._actions}
    bad = [k for k in data if k.replace("-", "_") not in known]
    if bad:
        ap.error(f"unknown config keys: {', '.join(bad)}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    return ap.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(ap, argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lfhash {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
