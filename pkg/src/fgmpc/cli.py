"""Command-line runner.

    fgmpc run fig2 -o out/              # closed-loop preset
    fgmpc run my.ini --set q_init=20    # config file plus overrides
    fgmpc fig1 --interval 120           # single-instant solver sweep
    fgmpc sweep --q 2 10 20 50 100      # constant-budget baselines

Exit status: 0 on success, 2 for usage or configuration errors, 1 when a run fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .closedloop import ScenarioConfig, run_scenario
from .config import ConfigError, dump_config, parse_overrides, resolve
from .errors import ScenarioAborted
from .presets import ALL_PRESETS, FIG1_INTERVAL, FIG1_ITERATIONS, preset_config, solver_sweep
from .trace import Trace, write_trace

log = logging.getLogger("fgmpc")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def run_preset(name: str, overrides=None):
    """Run a preset by name; ``overrides`` are ``key=value`` strings.

    Returns ``(result, exit_status)``. The result is a :class:`Trace` for the
    closed-loop presets and a :class:`~fgmpc.presets.SweepResult` for fig1.
    """
    if name not in ALL_PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(ALL_PRESETS)}")
    _, cfg = resolve(name, overrides)
    if name == "fig1":
        return solver_sweep(cfg, FIG1_INTERVAL, FIG1_ITERATIONS), EXIT_OK
    trace = run_scenario(cfg)
    trace.metadata["preset"] = name
    return trace, EXIT_OK


def _summary(trace: Trace, cfg: ScenarioConfig) -> str:
    half = trace.duration // 2
    return (f"intervals={len(trace.records)} tracking_cost={trace.tracking_cost(cfg.Q):.6g} "
            f"mean_q_final_half={trace.mean_q(half):.3f}")


def cmd_run(args) -> int:
    if args.source == "fig1":
        return cmd_fig1(args)
    preset, cfg = resolve(args.source, args.set)
    name = args.name or (args.source if preset == args.source else Path(args.source).stem)
    trace = run_scenario(cfg)
    trace.metadata["preset"] = preset
    out = Path(args.out)
    paths = write_trace(trace, out / name)
    (out / f"{name}.ini").write_text(dump_config(cfg))
    print(f"{name}: {_summary(trace, cfg)}")
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_fig1(args) -> int:
    _, cfg = resolve("fig1", args.set)
    res = solver_sweep(cfg, args.interval, args.iterations)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rel = res.relative_decrease()
    names = list(res.costs)
    path = out / "fig1.curves.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q"] + [f"{n}_rel" for n in names] + [f"{n}_cost" for n in names])
        for i in range(args.iterations + 1):
            w.writerow([str(i)] + [repr(float(rel[n][i])) for n in names]
                       + [repr(float(res.costs[n][i])) for n in names])
    meta = {"version": __version__, "preset": "fig1", "config": cfg.as_dict(),
            "interval": res.instance.interval, "k0": res.instance.k0,
            "iterations": args.iterations, "x_hat": [float(v) for v in res.instance.x_hat],
            "restarts": res.restarts,
            "derived": {"L": res.instance.engine.solver.L, "c": res.instance.engine.solver.c}}
    with open(out / "fig1.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    final = " ".join(f"{n}={rel[n][-1]:.6g}" for n in names)
    print(f"fig1: interval={res.instance.interval} k0={res.instance.k0} final relative decrease: {final}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = parse_overrides(args.set)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for q in args.q:
        cfg = preset_config("fig4", **{**base, "q_init": q, "adaptive": False})
        trace = run_scenario(cfg)
        rows.append((q, trace.tracking_cost(cfg.Q), len(trace.records)))
        print(f"q={q}: tracking_cost={rows[-1][1]:.6g}")
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "tracking_cost", "intervals"])
        for q, cost, n in rows:
            w.writerow([str(q), repr(float(cost)), str(n)])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgmpc", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("-o", "--out", default="out", help="output directory (default: out)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config field; repeatable")

    p = sub.add_parser("run", help="run a preset or a config file")
    p.add_argument("source", help=f"one of {', '.join(ALL_PRESETS)} or a path to an .ini file")
    p.add_argument("--name", help="output file stem (default: preset or file name)")
    p.add_argument("--interval", type=int, default=FIG1_INTERVAL, help=argparse.SUPPRESS)
    p.add_argument("--iterations", type=int, default=FIG1_ITERATIONS, help=argparse.SUPPRESS)
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fig1", help="solver variants on one frozen fig2 problem")
    p.add_argument("--interval", type=int, default=FIG1_INTERVAL)
    p.add_argument("--iterations", type=int, default=FIG1_ITERATIONS)
    common(p)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("sweep", help="constant-budget baselines")
    p.add_argument("--q", type=int, nargs="+", default=[2, 5, 10, 20, 50, 100])
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fgmpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioAborted as exc:
        print(f"fgmpc: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"fgmpc: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
