"""Command line entry point: ``chevron <config-path> [--out DIR] [--threads K]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import parse_config
from .errors import ConfigError
from .harness import EXIT_CONFIG, EXIT_IO, run_experiment


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="chevron", description="Chevron pattern equation experiments")
    ap.add_argument("config", help="path to a key = value configuration file")
    ap.add_argument("--out", help="output directory (overrides out_dir in the config)")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweep runs")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return run_experiment(cfg, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
