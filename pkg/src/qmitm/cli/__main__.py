from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import jsonschema

from ..config import load_configuration
from ..errors import ConfigurationError, GuardError, InstanceError
from ..genbench import PROBLEMS
from .commands import (
    EXIT_INPUT_ERROR,
    SOLVE_KINDS,
    VALIDATE_KINDS,
    cmd_bench,
    cmd_solve,
    cmd_validate,
)

__all__ = ["main", "build_parser"]
_logger = logging.getLogger(__name__)

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _size_list(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"sizes must be a comma list of integers: {e}") from e
    if not sizes:
        raise argparse.ArgumentTypeError("at least one size is required")
    return sizes


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="seed for all randomness")
    common.add_argument("--config", default=None, help="JSON configuration overrides")
    common.add_argument("--log-level", choices=_LOG_LEVELS, default=None)
    common.add_argument(
        "--timing", action="store_true", help="record wall-clock times (breaks byte equality)"
    )
    common.add_argument("--gen", default=None, help="generator settings, e.g. n=12,d=2,plant=1")

    parser = argparse.ArgumentParser(
        prog="qmitm",
        description="Meet-in-the-middle solvers with simulated Grover search and query counts.",
    )
    sub = parser.add_subparsers(dest="command_name", required=True)

    solve = sub.add_parser("solve", parents=[common], help="solve one instance")
    solve.add_argument("kind", choices=SOLVE_KINDS)
    solve.add_argument("input", nargs="?", default=None, help="instance file")
    solve.add_argument("--retries", type=int, default=None)
    solve.add_argument("--verify", action="store_true", help="cross-check with brute force")
    solve.add_argument("--subset-size", type=_positive, default=None)
    solve.add_argument("--alpha-override", type=float, default=None, help=argparse.SUPPRESS)
    solve.set_defaults(handler=cmd_solve)

    bench = sub.add_parser("bench", parents=[common], help="measure query scaling")
    bench.add_argument("problem", choices=PROBLEMS)
    bench.add_argument("--sizes", type=_size_list, default=None)
    bench.add_argument("--trials", type=_positive, default=None)
    bench.add_argument("--out", default=None, help="CSV path; the summary goes beside it")
    bench.add_argument("--plan", default=None, help="YAML benchmark plan")
    bench.set_defaults(handler=cmd_bench)

    validate = sub.add_parser("validate", parents=[common], help="check promises and claims")
    validate.add_argument("kind", choices=VALIDATE_KINDS)
    validate.add_argument("--trials", type=_positive, default=None)
    validate.add_argument("--alpha-override", type=float, default=None, help=argparse.SUPPRESS)
    validate.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point for the qmitm command line
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.command = ["qmitm", *argv]

    try:
        config = load_configuration(args.config)
    except ConfigurationError as e:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, force=True)
        _logger.error(str(e))
        return EXIT_INPUT_ERROR
    logging.basicConfig(level=args.log_level or config.log_level, stream=sys.stderr, force=True)
    if args.timing:
        config = config.replace(record_wall_time=True)

    try:
        return args.handler(args, config)
    except (InstanceError, GuardError, ConfigurationError) as e:
        _logger.error(str(e))
        return EXIT_INPUT_ERROR
    except OSError as e:
        _logger.error(f"Could not read {e.filename or 'input'}: {e.strerror or e}")
        return EXIT_INPUT_ERROR
    except jsonschema.ValidationError as e:
        _logger.error(f"Report failed schema validation: {e.message}")
        raise


if __name__ == "__main__":
    sys.exit(main())
