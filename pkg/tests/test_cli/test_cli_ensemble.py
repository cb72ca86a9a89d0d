import csv

import numpy as np

from src.storage.repository import read_manifest

SWEEP = (
    "ensemble",
    "sweep",
    "--n",
    "10",
    "--realizations",
    "2",
    "--c",
    "0.1",
    "1",
    "--gamma",
    "0",
    "1",
)


def test_sweep_writes_one_row_per_node(run_cli, output_dir):
    code, _, _ = run_cli(*SWEEP, "--output-dir", output_dir)

    assert code == 0
    with (output_dir / "sweep.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert [(r["c"], r["gamma"]) for r in rows] == [
        ("0.10000000000000001", "0"),
        ("0.10000000000000001", "1"),
        ("1", "0"),
        ("1", "1"),
    ]
    for row in rows:
        assert row["N"] == "10"
        assert row["realizations"] == "2"
        assert 0.1 <= float(row["aipr_mean"]) <= 1.0
        assert float(row["aipr_stddev"]) >= 0.0
    assert not (output_dir / "matrix_dump.txt").exists()

    manifest = read_manifest(output_dir / "manifest.env")
    assert manifest["command"] == "ensemble sweep"
    assert manifest["nodes"] == "4"
    assert manifest["solver"] == "lapack"


def test_sweep_matrix_dump(run_cli, output_dir):
    """
    Test that the dumped first matrix is complex symmetric with real couplings
    bounded by c and decay rates in (0, gamma) on the diagonal.
    """
    code, _, _ = run_cli(
        "ensemble",
        "sweep",
        "--n",
        "6",
        "--realizations",
        "1",
        "--c",
        "0.2",
        "--gamma",
        "3",
        "--dump-matrix",
        "--output-dir",
        output_dir,
    )

    assert code == 0
    lines = (output_dir / "matrix_dump.txt").read_text().splitlines()
    matrix = np.array([[complex(entry) for entry in line.split(",")] for line in lines])
    assert matrix.shape == (6, 6)
    assert np.array_equal(matrix, matrix.T)
    off_diagonal = matrix[~np.eye(6, dtype=bool)]
    assert np.all(off_diagonal.imag == 0.0)
    assert np.all(np.abs(off_diagonal.real) < 0.2)
    assert np.all((matrix.diagonal().imag < 0.0) & (matrix.diagonal().imag > -3.0))


def test_sweep_solvers_agree(run_cli, tmp_path):
    results = {}
    for solver in ("lapack", "qr"):
        out = tmp_path / solver
        code, _, _ = run_cli(*SWEEP, "--solver", solver, "--output-dir", out)
        assert code == 0
        with (out / "sweep.csv").open(newline="") as handle:
            results[solver] = [float(r["aipr_mean"]) for r in csv.DictReader(handle)]

    assert np.allclose(results["lapack"], results["qr"], atol=1e-8)


def test_sweep_rejects_a_one_dimensional_ensemble(run_cli, output_dir):
    code, _, err = run_cli("ensemble", "sweep", "--n", "1", "--output-dir", output_dir)

    assert code == 2
    assert "at least 2" in err


def test_sweep_rejects_negative_couplings(run_cli, output_dir):
    code, _, _ = run_cli(
        "ensemble", "sweep", "--c", "-0.1", "--output-dir", output_dir
    )

    assert code == 2
