"""``g2kit <command> --config <path> [--out <dir>] [--threads N]``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import COMMANDS, load_config
from .errors import ConfigError
from .runner import EXIT_FAILED, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2kit", description="G2 calculus and thin-slab instanton experiments.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", default=None, help="output directory (default: config 'out' or '.')")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent cells")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("g2kit: --threads must be >= 1", file=sys.stderr)
        return EXIT_FAILED
    try:
        cfg = load_config(args.config, args.command)
        result = run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"g2kit: config error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except OSError as exc:
        print(f"g2kit: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for name in result.files:
        print(name)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
