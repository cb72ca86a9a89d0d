import argparse

import structlog

from src.cli.common import (
    add_run_options,
    finite_float,
    floats_argv,
    int_at_least,
    open_unit_float,
    positive_float,
    record_run,
    resolve_run_options,
    run_options_argv,
)
from src.core.config import Settings
from src.schemas.two_level import AxisSpec, PhaseMapGrid, TwoLevelParams
from src.services import two_level
from src.storage.repository import ResultRepository, format_float

log = structlog.get_logger()

_DEFAULT_GRID = PhaseMapGrid()


def register(subparsers: argparse._SubParsersAction) -> None:
    group = subparsers.add_parser(
        "two-level", help="Two-mode model: phase map, EP encircling, eigenvalue curves."
    )
    commands = group.add_subparsers(dest="two_level_command", metavar="COMMAND")

    phase_map = commands.add_parser(
        "phase-map", help="Delocalization factor F over (d_eps/c, d_gamma/c)."
    )
    phase_map.add_argument(
        "--fc",
        type=open_unit_float,
        default=None,
        help="Delocalization threshold F_c in (0, 1) (default: OPENLOC_FC or 0.5).",
    )
    _add_axis(phase_map, "eps", _DEFAULT_GRID.d_eps_over_c)
    _add_axis(phase_map, "gamma", _DEFAULT_GRID.d_gamma_over_c)
    _add_anchor(phase_map)
    add_run_options(phase_map)
    phase_map.set_defaults(handler=run_phase_map)

    encircle = commands.add_parser(
        "encircle", help="Continue both eigenvalues once around a loop."
    )
    encircle.add_argument("--center-eps", type=finite_float, default=0.0)
    encircle.add_argument("--center-gamma", type=finite_float, default=2.0)
    encircle.add_argument("--radius", type=positive_float, default=0.5)
    encircle.add_argument("--steps", type=int_at_least(16), default=720)
    _add_anchor(encircle)
    add_run_options(encircle)
    encircle.set_defaults(handler=run_encircle)

    curves = commands.add_parser(
        "curves", help="Eigenvalue trajectories along d_eps/c for several d_gamma/c."
    )
    _add_axis(curves, "eps", _DEFAULT_GRID.d_eps_over_c)
    curves.add_argument(
        "--gamma-values",
        type=finite_float,
        nargs="+",
        default=[0.0, 1.0, 2.0, 3.0],
        help="d_gamma/c values, one curve each.",
    )
    _add_anchor(curves)
    add_run_options(curves)
    curves.set_defaults(handler=run_curves)


def _add_axis(parser: argparse.ArgumentParser, name: str, default: AxisSpec) -> None:
    parser.add_argument(f"--{name}-min", type=finite_float, default=default.start)
    parser.add_argument(f"--{name}-max", type=finite_float, default=default.stop)
    parser.add_argument(f"--{name}-num", type=int_at_least(1), default=default.num)


def _add_anchor(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eps1", type=finite_float, default=1.0)
    parser.add_argument("--gamma1", type=finite_float, default=1.0)
    parser.add_argument("--c", type=finite_float, default=1.0)


def _anchor(args: argparse.Namespace) -> TwoLevelParams:
    return TwoLevelParams(
        eps1=args.eps1, eps2=args.eps1, gamma1=args.gamma1, gamma2=args.gamma1, c=args.c
    )


def _anchor_argv(args: argparse.Namespace) -> list[str]:
    return [
        "--eps1",
        format_float(args.eps1),
        "--gamma1",
        format_float(args.gamma1),
        "--c",
        format_float(args.c),
    ]


def _axis_argv(args: argparse.Namespace, name: str) -> list[str]:
    return [
        f"--{name}-min",
        format_float(getattr(args, f"{name}_min")),
        f"--{name}-max",
        format_float(getattr(args, f"{name}_max")),
        f"--{name}-num",
        str(getattr(args, f"{name}_num")),
    ]


def run_phase_map(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    if args.fc is None:
        args.fc = settings.FC

    grid = PhaseMapGrid(
        d_eps_over_c=AxisSpec(start=args.eps_min, stop=args.eps_max, num=args.eps_num),
        d_gamma_over_c=AxisSpec(
            start=args.gamma_min, stop=args.gamma_max, num=args.gamma_num
        ),
    )
    result = two_level.phase_map(grid, F_c=args.fc, anchor=_anchor(args))

    nodes = [
        (x, y, i, j)
        for i, y in enumerate(result.d_gamma_over_c)
        for j, x in enumerate(result.d_eps_over_c)
    ]
    repository = ResultRepository(args.output_dir)
    repository.write_csv(
        "phase_map.csv",
        ("d_eps_over_c", "d_gamma_over_c", "F", "label"),
        ((x, y, result.f_values[i, j], result.label(i, j)) for x, y, i, j in nodes),
    )

    argv = [
        "two-level",
        "phase-map",
        "--fc",
        format_float(args.fc),
        *_axis_argv(args, "eps"),
        *_axis_argv(args, "gamma"),
        *_anchor_argv(args),
        *run_options_argv(args),
    ]
    record_run(
        repository,
        "two-level phase-map",
        argv,
        args,
        {
            "fc": args.fc,
            "nodes": int(result.f_values.size),
            "delocalized_nodes": int(result.delocalized.sum()),
        },
    )
    return 0


def run_encircle(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    center = (args.center_eps, args.center_gamma)
    permutation = two_level.encircle_ep(center, args.radius, args.steps, _anchor(args))
    exchanged = permutation == (2, 1)
    label = " ".join(map(str, permutation))

    repository = ResultRepository(args.output_dir)
    repository.write_csv(
        "encircle.csv",
        (
            "center_d_eps",
            "center_d_gamma",
            "radius",
            "steps",
            "permutation",
            "exchanged",
        ),
        [(*center, args.radius, args.steps, label, exchanged)],
    )
    print(f"permutation={label}")

    argv = [
        "two-level",
        "encircle",
        "--center-eps",
        format_float(args.center_eps),
        "--center-gamma",
        format_float(args.center_gamma),
        "--radius",
        format_float(args.radius),
        "--steps",
        str(args.steps),
        *_anchor_argv(args),
        *run_options_argv(args),
    ]
    record_run(
        repository, "two-level encircle", argv, args, {"exchanged": exchanged}
    )
    return 0


def run_curves(args: argparse.Namespace, settings: Settings) -> int:
    resolve_run_options(args, settings)
    axis = AxisSpec(start=args.eps_min, stop=args.eps_max, num=args.eps_num)
    curves = two_level.eigenvalue_curves(axis, args.gamma_values, _anchor(args))

    rows = (
        (
            x,
            y,
            curves.lambda_plus[i, j].real,
            curves.lambda_plus[i, j].imag,
            curves.lambda_minus[i, j].real,
            curves.lambda_minus[i, j].imag,
        )
        for i, y in enumerate(curves.d_gamma_over_c)
        for j, x in enumerate(curves.d_eps_over_c)
    )
    repository = ResultRepository(args.output_dir)
    repository.write_csv(
        "curves.csv",
        (
            "d_eps_over_c",
            "d_gamma_over_c",
            "re_plus",
            "im_plus",
            "re_minus",
            "im_minus",
        ),
        rows,
    )

    argv = [
        "two-level",
        "curves",
        *_axis_argv(args, "eps"),
        *floats_argv("--gamma-values", args.gamma_values),
        *_anchor_argv(args),
        *run_options_argv(args),
    ]
    record_run(repository, "two-level curves", argv, args, {})
    return 0
