import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Mapping, Sequence
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import structlog
from dotenv import dotenv_values

from src.core.exceptions import ParseError

log = structlog.get_logger()

MANIFEST_NAME = "manifest.env"


def format_float(value: float) -> str:
    """17 significant digits: enough to read back the identical double."""
    return format(float(value), ".17g")


def format_complex(value: complex) -> str:
    """A matrix-dump entry such as ``0.5-1.25j``."""
    value = complex(value)
    imag = format_float(value.imag)
    sign = "" if imag.startswith("-") else "+"
    return f"{format_float(value.real)}{sign}{imag}j"


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_atomic(path: Path, text: str) -> Path:
    """
    Writes `text` to a temporary file next to `path` and renames it into place, so a
    reader never sees a partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return path


def render_csv(
    header: Sequence[str] | None,
    rows: Iterable[Sequence[Any]],
    comments: Sequence[str] = (),
) -> str:
    buffer = io.StringIO()
    for comment in comments:
        buffer.write(f"# {comment}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


class ResultRepository:
    """
    Writes the files of one run into an output directory.

    Every file is complete once it appears: outputs are rendered in memory and moved
    into place with an atomic rename.
    """

    def __init__(self, output_dir: Path | str):
        self.output_dir = Path(output_dir)

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def write_csv(
        self,
        name: str,
        header: Sequence[str] | None,
        rows: Iterable[Sequence[Any]],
        comments: Sequence[str] = (),
    ) -> Path:
        target = write_atomic(self.path(name), render_csv(header, rows, comments))
        log.info("csv_written", path=str(target))
        return target

    def write_report(self, name: str, report: Mapping[str, Any]) -> Path:
        """A flat key=value report, one key per line, in the given key order."""
        text = "".join(f"{key}={_cell(value)}\n" for key, value in report.items())
        return write_atomic(self.path(name), text)

    def write_matrix(self, name: str, matrix: np.ndarray) -> Path:
        text = "".join(
            ",".join(format_complex(entry) for entry in row) + "\n"
            for row in np.asarray(matrix)
        )
        target = write_atomic(self.path(name), text)
        log.info("matrix_dumped", path=str(target), shape=list(np.shape(matrix)))
        return target

    def write_manifest(
        self,
        command: str,
        argv: Sequence[str],
        parameters: Mapping[str, Any],
        version: str,
        name: str = MANIFEST_NAME,
    ) -> Path:
        """
        Records a run as key=value lines: command, tool version, ISO-8601 UTC timestamp,
        the effective argument vector (replayable) and every effective parameter.
        """
        lines = [
            f"command={command}",
            f"version={version}",
            f"timestamp={datetime.now(timezone.utc).isoformat()}",
            f"argv='{json.dumps(list(argv))}'",
        ]
        lines += [f"{key}={_cell(value)}" for key, value in parameters.items()]
        target = write_atomic(self.path(name), "\n".join(lines) + "\n")
        log.info("manifest_written", path=str(target), command=command)
        return target


def read_manifest(path: Path | str) -> dict[str, str]:
    """
    Reads a manifest written by `ResultRepository.write_manifest`.

    Raises:
        OSError: If the file cannot be read.
        ParseError: If the manifest has no replayable argument vector.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    values = {key: value or "" for key, value in dotenv_values(path).items()}
    if "argv" not in values:
        raise ParseError(f"{path} has no argv entry")
    return values


def manifest_argv(manifest: Mapping[str, str]) -> list[str]:
    try:
        argv = json.loads(manifest["argv"])
    except (KeyError, json.JSONDecodeError) as exc:
        raise ParseError(f"manifest argv is not a JSON list: {exc}") from exc
    if not isinstance(argv, list) or not all(isinstance(a, str) for a in argv):
        raise ParseError("manifest argv must be a list of strings")
    return argv
