"""Command line entry point: ``resonant-kg <experiment> --config <path>``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import EXPERIMENTS, ConfigError, load_config

EXIT_OK, EXIT_USAGE, EXIT_THRESHOLD = 0, 1, 2

log = logging.getLogger("resonant_kg")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="resonant-kg", description="Long-range scattering experiments for resonant Klein-Gordon systems.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="JSON experiment configuration")
    p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted config key with a JSON value, e.g. time.dt=0.1 (repeatable)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.override)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.experiment != args.experiment:
        print(f"config error: experiment: config says {cfg.experiment!r}, command line says {args.experiment!r}",
              file=sys.stderr)
        return EXIT_USAGE

    from .experiments import run

    try:
        summary = run(cfg, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for name, v in summary.verdicts.items():
        state = "skip" if v.skipped else ("PASS" if v.passed else "FAIL")
        print(f"{state} {name}: value={v.value} threshold={v.threshold}")
    print(f"{'PASS' if summary.passed else 'FAIL'} {cfg.experiment} ({summary.wall_clock:.1f}s)")
    for path in summary.artifacts:
        log.info("wrote %s", path)
    return EXIT_OK if summary.passed else EXIT_THRESHOLD


if __name__ == "__main__":
    sys.exit(main())
