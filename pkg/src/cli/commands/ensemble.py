import argparse

import structlog

from src.cli.common import (
    add_run_options,
    add_solver_option,
    floats_argv,
    int_at_least,
    non_negative_float,
    record_run,
    resolve_run_options,
    resolve_solver,
    run_options_argv,
)
from src.core.config import Settings
from src.schemas.ensemble import EnsembleParams, SweepGrid
from src.services import ensemble
from src.storage.repository import ResultRepository

log = structlog.get_logger()

SWEEP_HEADER = ("c", "gamma", "N", "realizations", "aipr_mean", "aipr_stddev")

# Default couplings in units of the mean level spacing 2/N.
DEFAULT_C_IN_SPACINGS = (1.0, 10.0, 50.0)
DEFAULT_GAMMAS = (0.0, 0.01, 0.1, 1.0, 10.0)


def register(subparsers: argparse._SubParsersAction) -> None:
    group = subparsers.add_parser("ensemble", help="Random open-system ensemble.")
    commands = group.add_subparsers(dest="ensemble_command", metavar="COMMAND")

    sweep = commands.add_parser("sweep", help="Mean AIPR over a (c, gamma) grid.")
    sweep.add_argument("--n", type=int_at_least(2), default=None)
    sweep.add_argument("--realizations", type=int_at_least(1), default=None)
    sweep.add_argument(
        "--c",
        type=non_negative_float,
        nargs="+",
        default=None,
        help="Coupling bounds (default: 1, 10 and 50 mean level spacings).",
    )
    sweep.add_argument(
        "--gamma",
        type=non_negative_float,
        nargs="+",
        default=list(DEFAULT_GAMMAS),
        help="Opening strengths.",
    )
    sweep.add_argument("--workers", type=int_at_least(1), default=None)
    sweep.add_argument("--complex-coupling", action="store_true")
    sweep.add_argument(
        "--dump-matrix",
        action="store_true",
        help="Also write the first sampled matrix of the first node.",
    )
    add_solver_option(sweep)
    add_run_options(sweep)
    sweep.set_defaults(handler=run_sweep)


def run_sweep(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    opts = resolve_solver(args, settings)
    if args.n is None:
        args.n = settings.ENSEMBLE_N
    if args.realizations is None:
        args.realizations = settings.ENSEMBLE_REALIZATIONS
    if args.workers is None:
        args.workers = settings.WORKERS
    if args.c is None:
        spacing = ensemble.mean_level_spacing(args.n)
        args.c = [k * spacing for k in DEFAULT_C_IN_SPACINGS]

    grid = SweepGrid(c_values=tuple(args.c), gamma_values=tuple(args.gamma))
    rows = ensemble.sweep(
        grid,
        args.n,
        args.realizations,
        args.seed,
        workers=args.workers,
        opts=opts,
        complex_coupling=args.complex_coupling,
    )

    repository = ResultRepository(args.output_dir)
    repository.write_csv(
        "sweep.csv",
        SWEEP_HEADER,
        (
            (r.c, r.gamma, r.N, r.realizations, r.aipr_mean, r.aipr_stddev)
            for r in rows
        ),
    )
    if args.dump_matrix:
        first = EnsembleParams(
            N=args.n,
            c=grid.c_values[0],
            gamma=grid.gamma_values[0],
            seed=ensemble.node_seed(args.seed, 0, 0),
            complex_coupling=args.complex_coupling,
        )
        repository.write_matrix("matrix_dump.txt", ensemble.sample_hamiltonian(first))

    argv = [
        "ensemble",
        "sweep",
        "--n",
        str(args.n),
        "--realizations",
        str(args.realizations),
        *floats_argv("--c", args.c),
        *floats_argv("--gamma", args.gamma),
        "--workers",
        str(args.workers),
        "--solver",
        args.solver,
        *(["--complex-coupling"] if args.complex_coupling else []),
        *(["--dump-matrix"] if args.dump_matrix else []),
        *run_options_argv(args),
    ]
    record_run(
        repository,
        "ensemble sweep",
        argv,
        args,
        {
            "n": args.n,
            "realizations": args.realizations,
            "nodes": len(rows),
            "solver": args.solver,
            "complex_coupling": args.complex_coupling,
        },
    )
    return 0
