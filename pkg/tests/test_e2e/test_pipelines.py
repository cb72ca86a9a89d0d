import csv

import pytest

from src.storage.repository import read_manifest

# Small ensemble that still yields more than 100 unfolded spacings
ENSEMBLE_ARGS = ("--n", "120", "--realizations", "2", "--c", "0.8")
OPEN_GAMMA = "2"

# The phase map resolves the exceptional point at d_eps/c = 0, d_gamma/c = 2
MAP_ARGS = (
    "--eps-min",
    "-1",
    "--eps-max",
    "1",
    "--eps-num",
    "21",
    "--gamma-min",
    "0",
    "--gamma-max",
    "4",
    "--gamma-num",
    "41",
)


def _csv(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_ensemble_spectrum_round_trip(run_cli, tmp_path):
    """
    End-to-end run of the spectral pipeline.
    - Samples an open ensemble and exports the analysed eigenvalues.
    - Feeds the exported file back in as external data.
    - Replays the first run from its manifest and compares the report.
    """
    first = tmp_path / "ensemble"
    from_file = tmp_path / "from_file"
    replayed = tmp_path / "replayed"

    # 1. Ensemble source with export
    code, out, _ = run_cli(
        "spectra",
        "--from-ensemble",
        *ENSEMBLE_ARGS,
        "--gamma",
        OPEN_GAMMA,
        "--export",
        "--output-dir",
        first,
    )
    assert code == 0
    assert (first / "imag_histogram.csv").exists()

    # 2. The exported eigenvalues are valid input
    code, _, _ = run_cli(
        "spectra",
        "--input",
        first / "eigenvalues.csv",
        "--gamma",
        OPEN_GAMMA,
        "--output-dir",
        from_file,
    )
    assert code == 0
    assert read_manifest(from_file / "manifest.env")["values"] == "240"
    assert (from_file / "imag_histogram.csv").read_bytes() == (
        first / "imag_histogram.csv"
    ).read_bytes()

    # 3. Replay reproduces the report bit for bit
    code, replay_out, _ = run_cli(
        "replay", first / "manifest.env", "--output-dir", replayed
    )
    assert code == 0
    assert replay_out == out
    assert (replayed / "classification.txt").read_bytes() == (
        first / "classification.txt"
    ).read_bytes()
    assert (replayed / "eigenvalues.csv").read_bytes() == (
        first / "eigenvalues.csv"
    ).read_bytes()


def test_phase_map_locates_the_exceptional_point(run_cli, tmp_path):
    """
    End-to-end run of the two-mode pipeline.
    - Maps F over a grid around zero detuning.
    - Reads off where the delocalized stretch on the d_eps = 0 line ends.
    - Encircles that point and observes the eigenvalue exchange.
    """
    map_dir = tmp_path / "map"
    loop_dir = tmp_path / "loop"

    # 1. Phase map
    code, _, _ = run_cli("two-level", "phase-map", *MAP_ARGS, "--output-dir", map_dir)
    assert code == 0

    # 2. F = 1 on d_eps = 0 up to the exceptional point, then it drops
    centre_line = [
        (float(row["d_gamma_over_c"]), float(row["F"]))
        for row in _csv(map_dir / "phase_map.csv")
        if float(row["d_eps_over_c"]) == 0.0
    ]
    assert len(centre_line) == 41
    last_full = max(y for y, f in centre_line if f == pytest.approx(1.0, abs=1e-6))
    assert last_full == pytest.approx(2.0)

    # 3. Encircle the point found on the map
    code, out, _ = run_cli(
        "two-level",
        "encircle",
        "--center-gamma",
        repr(last_full),
        "--radius",
        "0.3",
        "--output-dir",
        loop_dir,
    )
    assert code == 0
    assert out.strip() == "permutation=2 1"


def test_refined_orbits_are_fixed_points(run_cli, tmp_path):
    """
    End-to-end run of the orbit pipeline.
    - Refines the builtin orbit table.
    - Refines each tabulated orbit again from its own bounce points.
    - Checks that the second refinement leaves the length unchanged.
    """
    table_dir = tmp_path / "table"
    code, _, _ = run_cli("orbits", "table", "--output-dir", table_dir)
    assert code == 0

    for row in _csv(table_dir / "orbits.csv"):
        points = _csv(table_dir / f"orbit_{row['name']}.csv")
        code, out, _ = run_cli(
            "orbits",
            "refine",
            "--s",
            *(p["s"] for p in points),
            "--name",
            row["name"],
            "--output-dir",
            tmp_path / row["name"],
        )
        assert code == 0, row["name"]
        refined = _csv(tmp_path / row["name"] / "orbits.csv")[0]
        assert float(refined["length"]) == pytest.approx(
            float(row["length"]), abs=1e-10
        )
