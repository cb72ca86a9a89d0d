import argparse
from collections.abc import Callable, Sequence
from pathlib import Path

import structlog

from src.core.config import Settings
from src.storage.repository import manifest_argv, read_manifest

log = structlog.get_logger()


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "replay", help="Re-run the command recorded in a run manifest."
    )
    parser.add_argument("manifest", type=Path)
    parser.add_argument(
        "--output-dir",
        type=Path,
        default=None,
        help="Write the outputs here instead of the recorded directory.",
    )
    parser.set_defaults(handler=run_replay)


def replay_argv(manifest: Path, output_dir: Path | None = None) -> list[str]:
    argv = manifest_argv(read_manifest(manifest))
    if output_dir is not None and "--output-dir" in argv:
        argv[argv.index("--output-dir") + 1] = str(output_dir)
    return argv


def run_replay(
    args: argparse.Namespace,
    settings: Settings,
    dispatch: Callable[[Sequence[str]], int] | None = None,
) -> int:
    argv = replay_argv(args.manifest, args.output_dir)
    log.info("replaying_run", manifest=str(args.manifest), argv=argv)
    if dispatch is None:
        from src.main import main as dispatch

    return dispatch(argv)
