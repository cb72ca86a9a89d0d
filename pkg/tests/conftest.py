import logging
import os
from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest


def pytest_configure():
    """
    Pin the environment the settings read before any test module imports them, so
    a developer's own OPENLOC_* variables cannot change test outcomes.
    """
    for key in list(os.environ):
        if key.startswith("OPENLOC_"):
            del os.environ[key]
    os.environ["OPENLOC_LOG_LEVEL"] = "WARNING"
    os.environ["OPENLOC_SEED"] = "20130101"


@pytest.fixture(autouse=True)
def _release_log_handlers():
    """
    The CLI attaches a stderr handler bound to the capture stream of the running test;
    drop it afterwards so later tests do not log into a closed stream.
    """
    yield
    logging.getLogger().handlers.clear()


@pytest.fixture
def rng() -> np.random.Generator:
    """A fixed-seed generator for test inputs."""
    return np.random.default_rng(12345)


@pytest.fixture
def output_dir(tmp_path: Path) -> Path:
    path = tmp_path / "results"
    path.mkdir()
    return path


@pytest.fixture
def run_cli(capsys) -> Callable[..., tuple[int, str, str]]:
    """
    Returns a helper that runs the command line in-process and hands back the exit
    code together with the captured stdout and stderr.
    """
    from src.main import main

    def _run(*argv: str) -> tuple[int, str, str]:
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return _run


@pytest.fixture
def random_matrix(rng) -> Callable[[int], np.ndarray]:
    """Dense complex matrices with standard normal real and imaginary parts."""

    def _make(n: int) -> np.ndarray:
        return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))

    return _make
