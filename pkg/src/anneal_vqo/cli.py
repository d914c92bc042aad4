"""Command line entry point: ``anneal-vqo <command> --config FILE``.

On failure a one-line JSON object ``{"error": ..., "message": ...}`` is
written to stderr and the exit status is nonzero (2 for configuration
problems, 1 otherwise).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import COMMANDS, ConfigError, default_jobs, default_out_dir, run_command


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anneal-vqo",
        description="Annealing-inspired variational optimization on 2-SAT Ising instances.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    parser.add_argument("--out", default=None, help="output directory (default: $ANNEAL_VQO_OUT or ./results)")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _fail(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    config_path = Path(args.config)
    try:
        config = json.loads(config_path.read_text())
    except FileNotFoundError:
        return _fail("ConfigError", f"config file not found: {config_path}", 2)
    except json.JSONDecodeError as exc:
        return _fail("ConfigError", f"{config_path}:{exc.lineno}: {exc.msg}", 2)
    out = Path(args.out) if args.out else default_out_dir()
    jobs = args.jobs if args.jobs is not None else default_jobs()
    try:
        run_command(args.command, config, out, args.seed, jobs, base_dir=config_path.parent)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), 2)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error record
        return _fail(type(exc).__name__, str(exc), 1)
    sys.stdout.write(json.dumps({"command": args.command, "out": str(out)}, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
