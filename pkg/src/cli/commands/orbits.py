import argparse
import re
import sys

import structlog

from src.cli.common import (
    add_geometry_options,
    add_run_options,
    finite_float,
    floats_argv,
    int_at_least,
    record_run,
    resolve_geometry,
    resolve_run_options,
    run_options_argv,
)
from src.core.config import Settings
from src.schemas.billiard import PeriodicOrbit
from src.services import billiard
from src.storage.repository import ResultRepository, format_float

log = structlog.get_logger()

TABLE_HEADER = ("name", "bounces", "length", "dk_star", "reflection_residual")
GEOMETRY_HEADER = ("s", "x", "y")


def register(subparsers: argparse._SubParsersAction) -> None:
    group = subparsers.add_parser("orbits", help="Stadium billiard periodic orbits.")
    commands = group.add_subparsers(dest="orbits_command", metavar="COMMAND")

    table = commands.add_parser("table", help="Refine every builtin orbit.")
    table.add_argument("--workers", type=int_at_least(1), default=None)
    add_geometry_options(table)
    add_run_options(table)
    table.set_defaults(handler=run_table)

    refine = commands.add_parser("refine", help="Refine one orbit from a seed.")
    refine.add_argument(
        "--s",
        type=finite_float,
        nargs="+",
        required=True,
        help="Initial bounce arclengths, in bounce order.",
    )
    refine.add_argument("--name", default="orbit")
    add_geometry_options(refine)
    add_run_options(refine)
    refine.set_defaults(handler=run_refine)


def _geometry_argv(args: argparse.Namespace) -> list[str]:
    return [
        "--radius",
        format_float(args.radius),
        "--half-length",
        format_float(args.half_length),
    ]


def _table_row(orbit: PeriodicOrbit) -> tuple:
    return (
        orbit.name,
        orbit.bounces,
        orbit.length,
        orbit.dk_star,
        orbit.reflection_residual,
    )


def _write_geometry(repository: ResultRepository, orbit: PeriodicOrbit) -> None:
    slug = re.sub(r"[^A-Za-z0-9_.-]+", "_", orbit.name or "orbit")
    repository.write_csv(
        f"orbit_{slug}.csv",
        GEOMETRY_HEADER,
        ((s, x, y) for s, (x, y) in zip(orbit.arclengths, orbit.points)),
    )


def run_table(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    geometry = resolve_geometry(args, settings)
    if args.workers is None:
        args.workers = settings.WORKERS

    orbits, failures = billiard.refine_all(geometry, workers=args.workers)

    repository = ResultRepository(args.output_dir)
    repository.write_csv("orbits.csv", TABLE_HEADER, (_table_row(o) for o in orbits))
    for orbit in orbits:
        _write_geometry(repository, orbit)

    argv = [
        "orbits",
        "table",
        "--workers",
        str(args.workers),
        *_geometry_argv(args),
        *run_options_argv(args),
    ]
    record_run(
        repository,
        "orbits table",
        argv,
        args,
        {
            "radius": args.radius,
            "half_length": args.half_length,
            "orbits": len(orbits),
            "failures": ",".join(failures) or "none",
        },
    )

    if failures:
        for label, error in failures.items():
            print(f"openloc: orbit {label} failed: {error}", file=sys.stderr)
        return max(error.exit_code for error in failures.values())
    return 0


def run_refine(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    geometry = resolve_geometry(args, settings)
    orbit = billiard.refine_orbit(args.s, geometry, name=args.name)

    repository = ResultRepository(args.output_dir)
    repository.write_csv("orbits.csv", TABLE_HEADER, [_table_row(orbit)])
    _write_geometry(repository, orbit)
    print(
        f"name={orbit.name} bounces={orbit.bounces} "
        f"length={format_float(orbit.length)} dk_star={format_float(orbit.dk_star)}"
    )

    argv = [
        "orbits",
        "refine",
        *floats_argv("--s", args.s),
        "--name",
        args.name,
        *_geometry_argv(args),
        *run_options_argv(args),
    ]
    record_run(
        repository,
        "orbits refine",
        argv,
        args,
        {"radius": args.radius, "half_length": args.half_length, "name": args.name},
    )
    return 0
