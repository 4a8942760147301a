"""Command line front end: ``kerrcoupler run|sweep|presets|check``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from ..entanglement import Convention
from .config import PRESET_NOTES, PRESETS, ConfigError, ScenarioConfig, parse_config, preset
from .runner import format_events, run_scenario, sweep_s


def _load(args) -> ScenarioConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = parse_config(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    if args.convention:
        cfg = replace(cfg, convention=Convention(args.convention))
    if getattr(args, "s", None) is not None:
        if not 0.0 <= args.s <= 1.0:
            raise ConfigError(f"--s {args.s} outside [0, 1]")
        cfg = cfg.with_s(args.s)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_scenario(cfg, out_dir=args.out)
    print(result.summary)
    print(f"wrote {result.csv_path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    s_values = args.s_values if args.s_values else None
    sweep = sweep_s(cfg, s_values, workers=args.workers, out_dir=args.out)
    for s, evs, n0 in zip(sweep.s_values, sweep.events, sweep.initial_negativity):
        print(f"s={s:g}")
        for name, lst in evs.items():
            print(f"  N_{name} (N0={n0[name]:.4g}): {format_events(lst)}")
    print(f"wrote {sweep.table_path}")
    return 0


def _cmd_presets(args) -> int:
    for name in PRESETS:
        print(f"{name:6s} {PRESET_NOTES[name]}")
    return 0


def _cmd_check(args) -> int:
    from .acceptance import run_all

    results = run_all(only=args.only)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrcoupler", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_flags(p):
        p.add_argument("--config", help="YAML scenario file")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--out", help="output directory (default: config output.dir)")
        p.add_argument("--convention", choices=[c.value for c in Convention])

    p = sub.add_parser("run", help="run one scenario and write its CSV")
    scenario_flags(p)
    p.add_argument("--s", type=float, help="override the Werner weight")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="run a scenario for several s values")
    scenario_flags(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--s-values", type=float, nargs="+", help="override the sweep grid")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("presets", help="list the built-in presets")
    p.set_defaults(func=_cmd_presets)

    p = sub.add_parser("check", help="run the acceptance criteria")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
