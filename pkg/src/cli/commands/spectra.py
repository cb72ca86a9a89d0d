import argparse
import sys
from pathlib import Path

import numpy as np
import structlog

from src.cli.common import (
    add_run_options,
    add_solver_option,
    int_at_least,
    non_negative_float,
    positive_float,
    record_run,
    resolve_run_options,
    resolve_solver,
    run_options_argv,
)
from src.core.config import Settings
from src.core.exceptions import DomainError
from src.schemas.ensemble import EnsembleParams
from src.services import ensemble, spectra
from src.storage.repository import ResultRepository, format_float

log = structlog.get_logger()

HISTOGRAM_HEADER = ("bin_left", "bin_right", "density")

# Default coupling of the ensemble source, in mean level spacings.
DEFAULT_C_IN_SPACINGS = 50.0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "spectra", help="Spacing and decay-rate statistics of a complex spectrum."
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument(
        "--from-ensemble",
        action="store_true",
        help="Sample the random ensemble (see --n, --c, --gamma, --realizations).",
    )
    source.add_argument(
        "--input", type=Path, default=None, help="Eigenvalue CSV with re,im rows."
    )
    parser.add_argument("--n", type=int_at_least(2), default=None)
    parser.add_argument(
        "--c",
        type=non_negative_float,
        default=None,
        help="Coupling bound (default: 50 mean level spacings).",
    )
    parser.add_argument(
        "--gamma",
        type=non_negative_float,
        default=None,
        help=(
            "Opening strength of the ensemble (default 0); for --input, the decay "
            "rate scale (default: the largest -Im of the data)."
        ),
    )
    parser.add_argument("--realizations", type=int_at_least(1), default=None)
    parser.add_argument("--complex-coupling", action="store_true")
    parser.add_argument(
        "--window", type=int_at_least(1), default=spectra.DEFAULT_WINDOW
    )
    parser.add_argument("--trim", type=non_negative_float, default=spectra.DEFAULT_TRIM)
    parser.add_argument("--bins", type=int_at_least(1), default=40)
    parser.add_argument("--max-spacing", type=positive_float, default=4.0)
    parser.add_argument("--imag-bins", type=int_at_least(1), default=20)
    parser.add_argument(
        "--export",
        action="store_true",
        help="Also write the analysed eigenvalues to eigenvalues.csv.",
    )
    add_solver_option(parser)
    add_run_options(parser)
    parser.set_defaults(handler=run_spectra)


def run_spectra(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    repository = ResultRepository(args.output_dir)

    if args.from_ensemble:
        groups, gamma, source_argv, parameters = _ensemble_source(args, settings)
    else:
        groups, gamma, source_argv, parameters = _file_source(args)

    spacings = spectra.unfold_groups(groups, window=args.window, trim=args.trim)
    histogram = spectra.spacing_histogram(
        spacings, bins=args.bins, range=(0.0, args.max_spacing)
    )
    classification = spectra.classify_spacings(spacings)
    values = np.concatenate(groups)

    repository.write_csv("spacing_histogram.csv", HISTOGRAM_HEADER, histogram.rows())
    if gamma is not None and gamma > 0.0:
        scale = args.n * args.c if args.from_ensemble else None
        imag = spectra.imag_distribution(
            values, gamma, bins=args.imag_bins, scale=scale
        )
        repository.write_csv("imag_histogram.csv", HISTOGRAM_HEADER, imag.rows())
        parameters["imag_out_of_range"] = imag.out_of_range
    else:
        log.warning("imag_histogram_skipped", reason="no decay rates to normalize")
    if args.export:
        spectra.export_eigenvalues(values, repository.path("eigenvalues.csv"))

    report = {
        "label": classification.label.value,
        "ks_wigner": format_float(classification.ks_wigner),
        "ks_poisson": format_float(classification.ks_poisson),
        "samples": classification.samples,
    }
    repository.write_report("classification.txt", report)
    for key, value in report.items():
        print(f"{key}={value}", file=sys.stdout)

    argv = [
        "spectra",
        *source_argv,
        "--window",
        str(args.window),
        "--trim",
        format_float(args.trim),
        "--bins",
        str(args.bins),
        "--max-spacing",
        format_float(args.max_spacing),
        "--imag-bins",
        str(args.imag_bins),
        *(["--export"] if args.export else []),
        *run_options_argv(args),
    ]
    parameters["label"] = classification.label.value
    record_run(repository, "spectra", argv, args, parameters)
    return 0


def _ensemble_source(args: argparse.Namespace, settings: Settings):
    opts = resolve_solver(args, settings)
    if args.n is None:
        args.n = settings.ENSEMBLE_N
    if args.realizations is None:
        args.realizations = settings.ENSEMBLE_REALIZATIONS
    if args.c is None:
        args.c = DEFAULT_C_IN_SPACINGS * ensemble.mean_level_spacing(args.n)
    if args.gamma is None:
        args.gamma = 0.0

    params = EnsembleParams(
        N=args.n,
        c=args.c,
        gamma=args.gamma,
        seed=args.seed,
        complex_coupling=args.complex_coupling,
    )
    groups = ensemble.realization_eigenvalues(params, args.realizations, opts)
    argv = [
        "--from-ensemble",
        "--n",
        str(args.n),
        "--c",
        format_float(args.c),
        "--gamma",
        format_float(args.gamma),
        "--realizations",
        str(args.realizations),
        "--solver",
        args.solver,
        *(["--complex-coupling"] if args.complex_coupling else []),
    ]
    parameters = {
        "source": "ensemble",
        "n": args.n,
        "c": args.c,
        "gamma": args.gamma,
        "realizations": args.realizations,
    }
    return groups, args.gamma, argv, parameters


def _file_source(args: argparse.Namespace):
    data = spectra.ingest_eigenvalues(args.input)
    gamma = args.gamma
    if gamma is None:
        largest = float(np.max(-data.values.imag))
        gamma = largest if largest > 0.0 else None
    elif gamma == 0.0:
        raise DomainError("--gamma must be positive for external data")

    argv = ["--input", str(args.input)]
    if args.gamma is not None:
        argv += ["--gamma", format_float(args.gamma)]
    parameters = {
        "source": data.source or str(args.input),
        "values": len(data),
    }
    if data.n is not None:
        parameters["refractive_index"] = data.n
    if gamma is not None:
        parameters["gamma_scale"] = gamma
    return [data.values], gamma, argv, parameters
