"""hardalloc command line: replay, fuzz, exploits, bench, stats."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench as benchmod
from . import harness
from .config import AllocConfig, InvalidFreePolicy, config_from_env, default_config
from .frontend import Allocator, HeapCorruptionAbort
from .provider import make_provider

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_HEAP_ABORT = 134


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arenas", type=int, help="number of arenas (HARDALLOC_ARENAS)")
    p.add_argument("--guard-interval", type=int,
                   help="every G-th slab is a guard page; 0 disables (HARDALLOC_GUARD_INTERVAL)")
    p.add_argument("--quarantine", type=int,
                   help="quarantined slabs kept per class (HARDALLOC_QUARANTINE)")
    p.add_argument("--no-canary", action="store_true", help="disable slot canaries")
    p.add_argument("--no-zero-check", action="store_true", help="disable zero-check on alloc")
    p.add_argument("--invalid-free", choices=[p.value for p in InvalidFreePolicy],
                   help="policy for invalid frees (HARDALLOC_INVALID_FREE)")
    p.add_argument("--provider", choices=["sim", "os"], default="sim",
                   help="page provider backend (default: sim)")


def _config_from_args(args) -> AllocConfig:
    base = config_from_env(default_config())
    overrides = {}
    if args.arenas is not None:
        overrides["nb_arenas"] = args.arenas
    if args.guard_interval is not None:
        overrides["guard_interval"] = args.guard_interval
    if args.quarantine is not None:
        overrides["quarantine_capacity"] = args.quarantine
    if args.no_canary:
        overrides["canary_enabled"] = False
    if args.no_zero_check:
        overrides["zero_check_enabled"] = False
    if args.invalid_free:
        overrides["invalid_free_policy"] = InvalidFreePolicy(args.invalid_free)
    if not overrides:
        return base
    return AllocConfig(
        sc_sizes=base.sc_sizes,
        nb_arenas=overrides.get("nb_arenas", base.nb_arenas),
        slabs_per_class=base.slabs_per_class,
        guard_interval=overrides.get("guard_interval", base.guard_interval),
        quarantine_capacity=overrides.get("quarantine_capacity", base.quarantine_capacity),
        canary_enabled=overrides.get("canary_enabled", base.canary_enabled),
        canary_size=base.canary_size,
        canary_magic=base.canary_magic,
        zero_check_enabled=overrides.get("zero_check_enabled", base.zero_check_enabled),
        zero_check_fail_request=base.zero_check_fail_request,
        invalid_free_policy=overrides.get("invalid_free_policy", base.invalid_free_policy),
    )


def _cmd_replay(args) -> int:
    cfg = _config_from_args(args)
    ops = harness.parse_trace_file(args.trace)
    provider = make_provider(args.provider)
    alloc = Allocator(cfg, provider)
    runner = harness.TraceRunner(alloc, harness.ShadowModel(), check_every=args.check_every)
    for op_no, op in enumerate(ops):
        runner.run_op(op_no, op)
    report = runner.finish()
    for v in report.violations:
        print(f"violation: {v}")
    print(f"report: {report.summary()}")
    if args.results:
        Path(args.results).write_text("\n".join(runner.results) + "\n", encoding="utf-8")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def _cmd_fuzz(args) -> int:
    cfg = _config_from_args(args)
    report = harness.fuzz(args.seed, args.ops, args.threads, cfg,
                          provider=make_provider(args.provider),
                          check_every=args.check_every)
    for v in report.violations:
        print(f"violation: {v}")
    print(f"report: {report.summary()}")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def _cmd_exploits(args) -> int:
    cfg = None
    if any((args.arenas, args.guard_interval, args.quarantine, args.no_canary,
            args.no_zero_check, args.invalid_free)):
        cfg = _config_from_args(args)
    report = harness.exploit_suite(cfg)
    for s in report.scenarios:
        print(f"{'PASS' if s.passed else 'FAIL'} {s.name}: {s.detail}")
    print(f"{'PASS' if report.benign_clean else 'FAIL'} benign_control")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def _cmd_bench(args) -> int:
    cfg = _config_from_args(args)
    rows = []
    for name in args.workload:
        spec = benchmod.WorkloadSpec(name=name, threads=args.threads,
                                     ops=args.ops, seed=args.seed)
        row = benchmod.run_workload(spec, cfg, provider=make_provider(args.provider))
        rows.append(row)
        print(f"{row.workload}: ops={row.ops} seconds={row.seconds} "
              f"ops/sec={row.ops_per_sec} peak_pages={row.peak_pages} "
              f"final_pages={row.final_pages}")
    if args.csv:
        benchmod.emit_csv(rows, args.csv)
        if not args.no_plot:
            plot = args.plot or str(Path(args.csv).with_suffix(".png"))
            benchmod.render_figure(rows, plot)
            print(f"figure: {plot}")
        print(f"csv: {args.csv}")
    elif args.plot:
        benchmod.render_figure(rows, args.plot)
        print(f"figure: {args.plot}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    cfg = _config_from_args(args)
    ops = harness.parse_trace_file(args.trace)
    alloc = Allocator(cfg, make_provider(args.provider))
    runner = harness.TraceRunner(alloc, harness.ShadowModel(), check_every=0)
    for op_no, op in enumerate(ops):
        runner.run_op(op_no, op)
    sys.stdout.write(alloc.stats_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardalloc",
                                     description="hardened slab allocator harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a trace file with invariant checking")
    p.add_argument("--trace", required=True, help="trace file path")
    p.add_argument("--check-every", type=int, default=64,
                   help="invariant sweep cadence in ops (default 64)")
    p.add_argument("--results", help="write per-op results to this file")
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("fuzz", help="randomized multithreaded fuzzing")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--ops", type=int, default=10_000, help="ops per thread")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--check-every", type=int, default=64)
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_fuzz)

    p = sub.add_parser("exploits", help="run the scripted attack scenarios")
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_exploits)

    p = sub.add_parser("bench", help="run workloads; CSV plus rendered figure")
    p.add_argument("--workload", action="append", required=True,
                   choices=list(benchmod.WORKLOAD_NAMES),
                   help="workload name (repeatable)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--ops", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--csv", help="write results to this CSV file")
    p.add_argument("--plot", help="figure path (default: CSV path with .png)")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("stats", help="replay a trace and dump per-class stats CSV")
    p.add_argument("--trace", required=True)
    _add_config_flags(p)
    p.set_defaults(fn=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.fn(args)
    except HeapCorruptionAbort as e:
        print(f"heap corruption abort: {e}", file=sys.stderr)
        return EXIT_HEAP_ABORT
    except (harness.TraceParseError, harness.TraceError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
