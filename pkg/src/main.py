import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

import structlog
from pydantic import ValidationError

from src import __version__
from src.cli.commands import ensemble, orbits, replay, spectra, two_level
from src.core.config import load_settings
from src.core.exceptions import OpenLocError
from src.core.logging import setup_logging

log = structlog.get_logger()

USAGE_EXIT = 2
IO_EXIT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="openloc",
        description=(
            "Opening-induced localization toolkit: two-mode exceptional points, "
            "random open-system ensembles, spectral statistics and stadium orbits."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="Flat KEY=value config file (OPENLOC_* keys); flags and env override it.",
    )
    parser.add_argument("--log-level", default=None)

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for module in (two_level, ensemble, spectra, orbits, replay):
        module.register(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """
    Runs one command and returns the process exit code: 0 on success, 2 for usage
    and domain errors, 3 for numerical non-convergence, 4 for I/O and parse errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT

    if getattr(args, "handler", None) is None:
        parser.print_help(sys.stderr)
        return USAGE_EXIT

    if args.config is not None and not args.config.is_file():
        print(f"openloc: error: config file not found: {args.config}", file=sys.stderr)
        return IO_EXIT
    try:
        settings = load_settings(args.config)
    except ValidationError as exc:
        print(f"openloc: error: invalid configuration: {exc}", file=sys.stderr)
        return USAGE_EXIT

    setup_logging(args.log_level or settings.LOG_LEVEL)

    try:
        return args.handler(args, settings)
    except ValidationError as exc:
        log.error("invalid_parameters", error=str(exc))
        print(f"openloc: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except OpenLocError as exc:
        log.error("command_failed", error=str(exc), error_type=type(exc).__name__)
        print(f"openloc: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        log.error("io_failed", error=str(exc))
        print(f"openloc: error: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())
