"""Command line entry point: ``fpfa drop | sweep | validate``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .sim import run_drop, run_sweep, write_outputs
from .validate import run_invariants


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="key = value configuration file")
    group = parser.add_argument_group("scenario overrides (same names as the config keys)")
    for f in fields(ScenarioConfig):
        flags = [f"--{f.name}"]
        if "_" in f.name:
            flags.append(f"--{f.name.replace('_', '-')}")
        group.add_argument(*flags, dest=f.name, metavar=f.name.upper(), default=None)


def _config(args: argparse.Namespace) -> ScenarioConfig:
    overrides = {f.name: getattr(args, f.name) for f in fields(ScenarioConfig) if getattr(args, f.name) is not None}
    return load_config(args.config, **overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpfa", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("drop", help="evaluate a single drop and print its link report")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep and write sweep.csv / summary.txt / plots")
    _add_config_flags(p)
    p.add_argument("--out-dir", "--out_dir", dest="out_dir", type=Path, default=Path("results"))

    p = sub.add_parser("validate", help="run the randomised invariant suite")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            results = run_invariants(args.seed)
            for r in results:
                print(r.line())
            return 0 if all(r.passed for r in results) else 1

        config = _config(args)
        if args.command == "drop":
            for arch in config.arch:
                print(run_drop(config, arch, config.seed).summary())
                print()
            return 0

        report = run_sweep(config)
        for path in write_outputs(report, args.out_dir, config.plots):
            print(f"wrote {path}")
        print(report.summary(), end="")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
