import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

from src.core.exceptions import DomainError, ParseError
from src.schemas.ensemble import EnsembleParams
from src.schemas.spectra import EigenvalueList, SpacingClass
from src.services import spectra
from src.services.ensemble import realization_eigenvalues
from src.services.spectra import (
    classify_spacings,
    export_eigenvalues,
    imag_distribution,
    ingest_eigenvalues,
    poisson_cdf,
    poisson_pdf,
    spacing_histogram,
    unfold,
    unfold_groups,
    wigner_cdf,
    wigner_pdf,
)

N = 300
SPACING = 2.0 / N


def _ensemble_spacings(c: float, gamma: float, realizations: int = 10) -> np.ndarray:
    params = EnsembleParams(N=N, c=c, gamma=gamma, seed=2024)
    return unfold_groups(realization_eigenvalues(params, realizations))


def _ensemble_values(c: float, gamma: float, realizations: int = 5) -> np.ndarray:
    params = EnsembleParams(N=N, c=c, gamma=gamma, seed=31)
    return np.concatenate(realization_eigenvalues(params, realizations))


def _write(tmp_path: Path, text: str) -> Path:
    path = tmp_path / "eigenvalues.csv"
    path.write_text(text, encoding="utf-8")
    return path


def test_reference_densities_are_normalized_with_unit_mean():
    """
    Test that both reference densities integrate to one and have unit mean.
    """
    for pdf in (wigner_pdf, poisson_pdf):
        total, _ = integrate.quad(pdf, 0.0, math.inf)
        mean, _ = integrate.quad(lambda s: s * pdf(s), 0.0, math.inf)
        assert total == pytest.approx(1.0, abs=1e-8)
        assert mean == pytest.approx(1.0, abs=1e-8)


def test_reference_values():
    assert wigner_pdf(0.0) == 0.0
    assert wigner_pdf(1.0) == pytest.approx(0.5 * math.pi * math.exp(-0.25 * math.pi))
    assert poisson_pdf(0.0) == 1.0
    assert wigner_cdf(1.0) == pytest.approx(1.0 - math.exp(-0.25 * math.pi))
    assert poisson_cdf(2.0) == pytest.approx(1.0 - math.exp(-2.0))
    assert np.allclose(
        wigner_pdf(np.array([0.0, 2.0])), [0.0, math.pi * math.exp(-math.pi)]
    )


def test_cdfs_match_the_densities():
    s = np.linspace(0.0, 3.0, 7)
    for pdf, cdf in ((wigner_pdf, wigner_cdf), (poisson_pdf, poisson_cdf)):
        integrated = [integrate.quad(pdf, 0.0, x)[0] for x in s]
        assert np.allclose(cdf(s), integrated, atol=1e-10)


def test_densities_reject_negative_spacings():
    with pytest.raises(DomainError):
        wigner_pdf(-0.1)
    with pytest.raises(DomainError):
        poisson_pdf([1.0, -1.0])


def test_unfolding_an_evenly_spaced_spectrum_gives_unit_spacings():
    spacings = unfold(np.arange(100) * 0.37 + 5.0)

    assert np.allclose(spacings, 1.0)
    # 10% trimmed at each edge of 100 values leaves 80 levels.
    assert spacings.size == 79


def test_unfolding_ignores_the_input_order(rng):
    values = np.cumsum(rng.exponential(size=200))

    assert np.array_equal(unfold(rng.permutation(values)), unfold(values))


def test_unfolding_removes_a_changing_density():
    """
    Test an interleaving of two lattices with incommensurate steps: after unfolding the
    mean spacing is one.
    """
    values = np.union1d(np.arange(0.0, 400.0, 1.0), 0.3 + 1.07 * np.arange(373))

    spacings = unfold(values)

    assert spacings.mean() == pytest.approx(1.0, rel=0.02)


def test_unfolding_rescales_a_stretched_spectrum():
    """
    A spectrum whose density varies slowly still unfolds to unit mean spacing.
    """
    values = np.sqrt(np.arange(1, 2001, dtype=float))

    spacings = unfold(values)

    assert spacings.mean() == pytest.approx(1.0, rel=0.01)
    assert np.allclose(spacings, 1.0, atol=0.05)


@pytest.mark.parametrize(
    "window, trim, size",
    [(20, 0.1, 100), (0, 0.1, 100), (21, 0.5, 100), (21, -0.1, 100), (21, 0.1, 22)],
)
def test_unfolding_rejects_bad_arguments(window, trim, size):
    with pytest.raises(DomainError):
        unfold(np.arange(size, dtype=float), window=window, trim=trim)


def test_unfolding_rejects_a_degenerate_spectrum():
    with pytest.raises(DomainError):
        unfold(np.ones(100))


def test_unfold_groups_pools_each_spectrum_separately():
    first = np.arange(50) * 1.0
    second = np.arange(50) * 10.0 + 1000.0

    pooled = unfold_groups([first, second])

    assert pooled.size == 2 * 39
    assert np.allclose(pooled, 1.0)
    with pytest.raises(DomainError):
        unfold_groups([])


def test_spacing_histogram_is_a_density():
    spacings = np.random.default_rng(5).exponential(size=5000)

    histogram = spacing_histogram(spacings, bins=40, range=(0.0, 4.0))

    assert histogram.densities.shape == (40,)
    assert np.sum(histogram.densities * histogram.widths) == pytest.approx(1.0)
    assert histogram.sample_count == 5000
    assert histogram.mean_spacing == pytest.approx(spacings.mean())
    assert len(histogram.rows()) == 40
    assert histogram.rows()[0][:2] == (0.0, 0.1)


def test_spacing_histogram_rejects_bad_samples():
    with pytest.raises(DomainError):
        spacing_histogram([])
    with pytest.raises(DomainError):
        spacing_histogram([-1.0, 1.0])
    with pytest.raises(DomainError):
        spacing_histogram([5.0, 6.0], range=(0.0, 4.0))


def test_poisson_sample_is_classified_as_poisson():
    """
    The KS distance of 10^5 exponential samples to the Poisson reference is tiny, far
    below the distance to the Wigner surmise.
    """
    samples = np.random.default_rng(0).exponential(size=100_000)

    result = classify_spacings(samples)

    assert result.ks_poisson < 0.01
    assert result.ks_wigner > 0.1
    assert result.label is SpacingClass.POISSON
    assert result.samples == 100_000


def test_wigner_sample_is_classified_as_wigner():
    # Inverse-CDF samples of the surmise.
    u = np.random.default_rng(1).uniform(size=20_000)
    samples = np.sqrt(-4.0 / math.pi * np.log1p(-u))

    result = classify_spacings(samples)

    assert result.ks_wigner < 0.02
    assert result.label is SpacingClass.WIGNER


def test_half_and_half_mixture_is_intermediate():
    rng = np.random.default_rng(2)
    u = rng.uniform(size=5000)
    wigner = np.sqrt(-4.0 / math.pi * np.log1p(-u))
    mixture = np.concatenate([wigner, rng.exponential(size=5000)])

    assert classify_spacings(mixture).label is SpacingClass.INTERMEDIATE


def test_classification_needs_enough_samples():
    with pytest.raises(DomainError):
        classify_spacings(np.ones(99))


def test_closed_ergodic_ensemble_shows_level_repulsion():
    spacings = _ensemble_spacings(c=50.0 * SPACING, gamma=0.0)

    result = classify_spacings(spacings)

    assert result.label is SpacingClass.WIGNER
    assert spacings.mean() == pytest.approx(1.0, rel=0.05)


def test_strong_opening_gives_poisson_spacings():
    c = 50.0 * SPACING

    result = classify_spacings(_ensemble_spacings(c=c, gamma=100.0 * c))

    assert result.label is SpacingClass.POISSON


def test_spacing_statistics_move_from_wigner_to_poisson():
    """
    Test the crossover at growing opening on more than 5000 pooled spacings: Wigner
    when closed, intermediate at gamma/c = 4 and Poisson at gamma/c = 100, with the
    distance to Wigner growing and the distance to Poisson shrinking.
    """
    c = 50.0 * SPACING

    results = [
        classify_spacings(_ensemble_spacings(c=c, gamma=g, realizations=21))
        for g in (0.0, 4.0 * c, 100.0 * c)
    ]

    assert all(r.samples >= 5000 for r in results)
    assert [r.label for r in results] == [
        SpacingClass.WIGNER,
        SpacingClass.INTERMEDIATE,
        SpacingClass.POISSON,
    ]
    ks_wigner = [r.ks_wigner for r in results]
    ks_poisson = [r.ks_poisson for r in results]
    assert ks_wigner[0] < ks_wigner[1] < ks_wigner[2]
    assert ks_poisson[0] > ks_poisson[1] > ks_poisson[2]


def test_strong_opening_spreads_decay_rates_uniformly():
    """
    Far past the crossover each eigenvalue keeps the decay rate of its own mode, so
    -Im(lambda)/gamma follows the uniform draw of the rates.
    """
    c = 10.0 * SPACING
    gamma = 100.0 * c
    values = _ensemble_values(c=c, gamma=gamma, realizations=10)

    histogram = imag_distribution(values, gamma)
    rates = np.clip(-values.imag / gamma, 0.0, 1.0)

    assert np.sum(histogram.densities * histogram.widths) == pytest.approx(1.0)
    assert histogram.out_of_range == 0
    assert stats.kstest(rates, "uniform").statistic < 0.05


def test_weak_opening_concentrates_decay_rates():
    """
    Below the crossover the states are spread over many modes and their decay rates
    cluster around the mean rate.
    """
    c = 50.0 * SPACING
    gamma = 0.1 * c
    values = _ensemble_values(c=c, gamma=gamma)

    rates = -values.imag / gamma

    assert rates.mean() == pytest.approx(0.5, abs=0.05)
    assert rates.std() < 0.1


def test_out_of_range_decay_rates_are_counted_and_clipped(mocker):
    mock_log = mocker.patch.object(spectra, "log")
    values = np.array([-0.5j, -1.5j, 0.2j, -0.25j])

    histogram = imag_distribution(values, gamma=1.0, bins=4)

    assert histogram.out_of_range == 2
    assert histogram.sample_count == 4
    assert np.sum(histogram.densities * histogram.widths) == pytest.approx(1.0)
    mock_log.warning.assert_called_once()
    assert mock_log.warning.call_args.args[0] == "decay_rates_out_of_range"


def test_tiny_positive_imaginary_parts_are_tolerated():
    histogram = imag_distribution(np.array([1e-12j, -0.5j]), gamma=1.0)

    assert histogram.out_of_range == 0


def test_out_of_range_slack_scales_with_the_coupling():
    """
    Test that the flagging slack is 1e-9 * N * c on the decay rate: a rate 5e-9 past
    gamma is flagged by default but tolerated for an ensemble with N * c = 10.
    """
    values = np.array([-(2.0 + 5e-9) * 1j, -1.0j])

    default = imag_distribution(values, gamma=2.0)
    scaled = imag_distribution(values, gamma=2.0, scale=10.0)
    tight = imag_distribution(values, gamma=2.0, scale=1.0)

    assert default.out_of_range == 1
    assert scaled.out_of_range == 0
    assert tight.out_of_range == 1


def test_imag_distribution_accepts_eigenvalue_lists():
    data = EigenvalueList(values=[1.0 - 0.1j, 2.0 - 0.2j])

    histogram = imag_distribution(data, gamma=0.4, bins=2)

    assert histogram.densities.tolist() == [1.0, 1.0]


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_imag_distribution_needs_an_opening(gamma):
    with pytest.raises(DomainError):
        imag_distribution(np.array([-0.1j]), gamma)


def test_ingest_reads_pairs_and_provenance(tmp_path):
    path = _write(
        tmp_path,
        "# source=stadium\n# n=3.3\nre,im\n32.289,-0.175\n\n32.75,-0.2\n",
    )

    data = ingest_eigenvalues(path)

    assert len(data) == 2
    assert data.values[0] == complex(32.289, -0.175)
    assert data.source == "stadium"
    assert data.n == 3.3


def test_ingest_without_header(tmp_path):
    data = ingest_eigenvalues(_write(tmp_path, "1.5, -0.25\r\n2,0\r\n"))

    assert data.values.tolist() == [1.5 - 0.25j, 2 + 0j]
    assert data.source is None


def test_header_only_file_is_empty(tmp_path):
    with pytest.raises(DomainError):
        ingest_eigenvalues(_write(tmp_path, "re,im\n"))


@pytest.mark.parametrize(
    "text, line",
    [
        ("re,im\n1.0,2.0\n1.0;2.0\n", 3),
        ("1.0,abc\n", 1),
        ("# n=fast\n", 1),
        ("1.0,2.0\nre,im\n", 2),
        ("1.0,inf\n", 1),
        ("1.0,2.0,3.0\n", 1),
    ],
)
def test_malformed_lines_report_their_number(tmp_path, text, line):
    with pytest.raises(ParseError) as excinfo:
        ingest_eigenvalues(_write(tmp_path, text))

    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"line {line}: ")
    assert excinfo.value.exit_code == 4


def test_undecodable_line_reports_its_number(tmp_path):
    path = tmp_path / "eigenvalues.csv"
    path.write_bytes(b"re,im\n32.289,-0.175\n\xff\xfe,1\n")

    with pytest.raises(ParseError) as excinfo:
        ingest_eigenvalues(path)

    assert excinfo.value.line == 3
    assert str(excinfo.value).startswith("line 3: ")


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        ingest_eigenvalues(tmp_path / "absent.csv")


def test_export_reads_back_bit_exact(tmp_path, rng):
    values = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    data = EigenvalueList(values=values, source="ensemble N=50", n=1.5)

    path = export_eigenvalues(data, tmp_path / "out" / "eigenvalues.csv")
    again = ingest_eigenvalues(path)

    assert np.array_equal(again.values, values)
    assert again.source == "ensemble N=50"
    assert again.n == 1.5
    assert path.read_text(encoding="utf-8").splitlines()[2] == "re,im"
