from src import __version__
from src.storage.repository import read_manifest


def test_version(run_cli):
    code, out, _ = run_cli("--version")

    assert code == 0
    assert out.strip() == __version__


def test_no_command_prints_usage(run_cli):
    code, _, err = run_cli()

    assert code == 2
    assert "usage" in err


def test_unknown_command_is_a_usage_error(run_cli):
    code, _, _ = run_cli("plot")

    assert code == 2


def test_missing_config_file(run_cli, tmp_path):
    code, _, err = run_cli(
        "--config",
        tmp_path / "missing.env",
        "orbits",
        "table",
        "--output-dir",
        tmp_path,
    )

    assert code == 4
    assert "config file not found" in err


def test_invalid_config_file(run_cli, tmp_path):
    config = tmp_path / "openloc.env"
    config.write_text("OPENLOC_FC=2.0\n")

    code, _, err = run_cli("--config", config, "two-level", "phase-map")

    assert code == 2
    assert "invalid configuration" in err


def test_config_file_supplies_defaults(run_cli, tmp_path):
    """
    Test that a config file sets the output directory and F_c, and that a flag
    still overrides the file.
    """
    out_dir = tmp_path / "from-config"
    config = tmp_path / "openloc.env"
    config.write_text(f"OPENLOC_OUTPUT_DIR={out_dir}\nOPENLOC_FC=0.25\n")

    code, _, _ = run_cli(
        "--config",
        config,
        "two-level",
        "phase-map",
        "--eps-num",
        "3",
        "--gamma-num",
        "3",
        "--seed",
        "11",
    )

    assert code == 0
    manifest = read_manifest(out_dir / "manifest.env")
    assert manifest["fc"] == "0.25"
    assert manifest["seed"] == "11"


def test_environment_seed_reaches_the_manifest(run_cli, output_dir, monkeypatch):
    monkeypatch.setenv("OPENLOC_SEED", "99")

    code, _, _ = run_cli(
        "ensemble",
        "sweep",
        "--n",
        "8",
        "--realizations",
        "1",
        "--c",
        "0.1",
        "--gamma",
        "0",
        "--output-dir",
        output_dir,
    )

    assert code == 0
    assert read_manifest(output_dir / "manifest.env")["seed"] == "99"


def test_replay_reproduces_the_outputs(run_cli, tmp_path):
    """
    Test that replaying a manifest into a fresh directory rewrites a byte-identical
    sweep table.
    """
    first = tmp_path / "first"
    second = tmp_path / "second"
    code, _, _ = run_cli(
        "ensemble",
        "sweep",
        "--n",
        "12",
        "--realizations",
        "3",
        "--c",
        "0.1",
        "0.5",
        "--gamma",
        "0",
        "1",
        "--seed",
        "5",
        "--output-dir",
        first,
    )
    assert code == 0

    code, _, _ = run_cli("replay", first / "manifest.env", "--output-dir", second)

    assert code == 0
    assert (second / "sweep.csv").read_bytes() == (first / "sweep.csv").read_bytes()
    assert read_manifest(second / "manifest.env")["output_dir"] == str(second)


def test_replay_of_a_missing_manifest(run_cli, tmp_path):
    code, _, _ = run_cli("replay", tmp_path / "manifest.env")

    assert code == 4


def test_replay_of_a_manifest_without_argv(run_cli, tmp_path):
    manifest = tmp_path / "manifest.env"
    manifest.write_text("command=spectra\n")

    code, _, err = run_cli("replay", manifest)

    assert code == 4
    assert "argv" in err
