"""Command line entry point: ``towercoh CONFIG [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import KNOWN_CHECKS, ConfigError
from .runner import (EXIT_INVALID, INPUT_ERRORS, emit_matrices, list_builtin_examples, load_job, run)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="towercoh",
                                 description="Completed cohomology of towers of covers from a job config.")
    ap.add_argument("config", nargs="?", help="config file, or the name of a bundled example")
    ap.add_argument("--degrees", help="degrees to compute, e.g. '0 1 2' or '0,1'")
    ap.add_argument("--max-r", type=int, help="largest tower level R")
    ap.add_argument("--max-s", type=int, help="largest precision S")
    ap.add_argument("--checks", help=f"comma separated subset of {', '.join(KNOWN_CHECKS)}")
    ap.add_argument("--out", help="write the JSON report here")
    ap.add_argument("--jobs", type=int, help="worker processes for the (r, s) grid")
    ap.add_argument("--emit-matrices", metavar="DIR", help="dump every coboundary matrix into DIR")
    ap.add_argument("--list", action="store_true", help="list the bundled example configs and exit")
    ap.add_argument("--quiet", action="store_true", help="no human summary on stdout")
    return ap


def _override(cfg, args) -> None:
    if args.degrees is not None:
        degrees = [int(t) for t in args.degrees.replace(",", " ").split()]
        for n in degrees:
            if not 0 <= n <= max(cfg.complex.dim, 0):
                raise ConfigError(f"degree {n} outside 0..{cfg.complex.dim}", field="--degrees")
        cfg.degrees = degrees
    if args.max_s is not None:
        if args.max_s < 1:
            raise ConfigError("max_s must be at least 1", field="--max-s")
        cfg.max_s = args.max_s
    if args.max_r is not None:
        if args.max_r < 1 or args.max_r > cfg.tower.depth:
            raise ConfigError(f"max_r must be in 1..{cfg.tower.depth}", field="--max-r")
        cfg.max_r = args.max_r
    if args.checks is not None:
        checks = [c for c in args.checks.replace(",", " ").split()]
        bad = [c for c in checks if c not in KNOWN_CHECKS]
        if bad:
            raise ConfigError(f"unknown checks {bad}", field="--checks")
        cfg.checks = checks
    if args.jobs is not None:
        cfg.jobs = max(1, args.jobs)
    if args.out is not None:
        cfg.out = args.out
    if args.emit_matrices is not None:
        cfg.emit_matrices = args.emit_matrices


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        for name, text in list_builtin_examples().items():
            print(f"{name:<20} {text}")
        return 0
    if not args.config:
        print("error: a config path or bundled example name is required (see --list)", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_job(args.config)
        _override(cfg, args)
        report = run(cfg)
        if cfg.emit_matrices:
            emit_matrices(cfg, cfg.emit_matrices)
    except INPUT_ERRORS as exc:
        print(f"invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not args.quiet:
        print("\n".join(report.summary))
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
