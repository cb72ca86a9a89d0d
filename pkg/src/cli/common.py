"""
Helpers shared by the subcommand modules: argument types, common options and the
run manifest.
"""

import argparse
import math
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import structlog

from src import __version__
from src.core.config import Settings
from src.schemas.billiard import StadiumGeometry
from src.schemas.linalg import SolverOptions
from src.schemas.run import RunConfig
from src.storage.repository import ResultRepository, format_float

log = structlog.get_logger()


def int_at_least(minimum: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer: {text!r}") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value}")
        return value

    return parse


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number: {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return value


def non_negative_float(text: str) -> float:
    value = finite_float(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def positive_float(text: str) -> float:
    value = finite_float(text)
    if value <= 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def open_unit_float(text: str) -> float:
    value = finite_float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def seed_int(text: str) -> int:
    value = int_at_least(0)(text)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output-dir",
        type=Path,
        default=None,
        help="Directory for result files (default: OPENLOC_OUTPUT_DIR or ./results).",
    )
    parser.add_argument(
        "--seed",
        type=seed_int,
        default=None,
        help="Master seed (default: OPENLOC_SEED).",
    )


def add_geometry_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--radius", type=positive_float, default=None)
    parser.add_argument(
        "--half-length",
        type=positive_float,
        default=None,
        help="Half length a of the straight segments (default: the radius).",
    )


def add_solver_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--solver", choices=("lapack", "qr"), default=None)


def resolve_run_options(args: argparse.Namespace, settings: Settings) -> None:
    """Fills unset common options from the settings, in place."""
    if args.output_dir is None:
        args.output_dir = settings.OUTPUT_DIR
    if args.seed is None:
        args.seed = settings.SEED


def resolve_geometry(args: argparse.Namespace, settings: Settings) -> StadiumGeometry:
    if args.radius is None:
        args.radius = settings.STADIUM_RADIUS
    if args.half_length is None:
        args.half_length = settings.STADIUM_HALF_LENGTH or args.radius
    return StadiumGeometry(radius=args.radius, half_length=args.half_length)


def resolve_solver(args: argparse.Namespace, settings: Settings) -> SolverOptions:
    if args.solver is None:
        args.solver = settings.SOLVER_METHOD
    return SolverOptions(method=args.solver)


def run_options_argv(args: argparse.Namespace) -> list[str]:
    return ["--output-dir", str(args.output_dir), "--seed", str(args.seed)]


def floats_argv(flag: str, values: Sequence[float]) -> list[str]:
    return [flag, *(format_float(v) for v in values)]


def record_run(
    repository: ResultRepository,
    command: str,
    argv: Sequence[str],
    args: argparse.Namespace,
    parameters: dict[str, Any],
) -> RunConfig:
    """Writes the manifest of a finished run and returns its configuration."""
    config = RunConfig(
        command=command,
        argv=tuple(argv),
        seed=args.seed,
        output_dir=args.output_dir,
        parameters=parameters,
    )
    repository.write_manifest(
        command=config.command,
        argv=config.argv,
        parameters=config.manifest_entries(),
        version=__version__,
    )
    log.info("run_recorded", command=command, output_dir=str(config.output_dir))
    return config
