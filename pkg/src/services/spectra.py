"""
Level-spacing and decay-rate statistics of complex spectra.
"""

import math
from collections.abc import Iterable
from pathlib import Path

import numpy as np
import structlog
from numpy.typing import ArrayLike
from scipy import stats
from scipy.ndimage import uniform_filter1d

from src.core.exceptions import DomainError, ParseError
from src.schemas.spectra import (
    EigenvalueList,
    SpacingClass,
    SpacingClassification,
    SpacingHistogram,
)
from src.storage.repository import format_float, render_csv, write_atomic

log = structlog.get_logger()

DEFAULT_WINDOW = 21
DEFAULT_TRIM = 0.1
CLASSIFY_MARGIN = 0.05
MIN_CLASSIFY_SAMPLES = 100
IMAG_TOLERANCE = 1e-9

HEADER = ("re", "im")


# ---------------------------------------------------------------------------
# Reference distributions
# ---------------------------------------------------------------------------


def _non_negative(s: ArrayLike) -> np.ndarray:
    values = np.asarray(s, dtype=float)
    if np.any(values < 0.0):
        raise DomainError("spacings must be non-negative")
    return values


def _scalar_or_array(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def wigner_pdf(s: ArrayLike):
    """Wigner surmise (pi/2) s exp(-pi s^2 / 4); unit mean."""
    s = _non_negative(s)
    return _scalar_or_array(0.5 * math.pi * s * np.exp(-0.25 * math.pi * s * s))


def poisson_pdf(s: ArrayLike):
    s = _non_negative(s)
    return _scalar_or_array(np.exp(-s))


def wigner_cdf(s: ArrayLike):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return _scalar_or_array(-np.expm1(-0.25 * math.pi * s * s))


def poisson_cdf(s: ArrayLike):
    s = np.clip(np.asarray(s, dtype=float), 0.0, None)
    return _scalar_or_array(-np.expm1(-s))


# ---------------------------------------------------------------------------
# Spacings
# ---------------------------------------------------------------------------


def unfold(
    reals: ArrayLike, window: int = DEFAULT_WINDOW, trim: float = DEFAULT_TRIM
) -> np.ndarray:
    """
    Nearest-neighbour spacings in units of the local mean spacing.

    The values are sorted, a fraction `trim` is dropped at each spectral edge, and each
    spacing is divided by the mean of the `window` spacings centred on it.

    Raises:
        DomainError: For an even or non-positive window, a trim outside [0, 0.5), fewer
            than window + 2 values, or a zero local mean spacing.
    """
    if window < 1 or window % 2 == 0:
        raise DomainError(
            f"unfolding window must be a positive odd integer, got {window}"
        )
    if not 0.0 <= trim < 0.5:
        raise DomainError(f"edge trim must lie in [0, 0.5), got {trim}")
    values = np.sort(np.asarray(reals, dtype=float).reshape(-1))
    if values.size < window + 2:
        raise DomainError(
            f"unfolding needs at least {window + 2} values, got {values.size}"
        )

    cut = int(trim * values.size)
    kept = values[cut : values.size - cut]
    spacings = np.diff(kept)
    local_mean = uniform_filter1d(spacings, size=window, mode="nearest")
    if np.any(local_mean <= 0.0):
        raise DomainError("local mean spacing vanishes; the spectrum is degenerate")
    return spacings / local_mean


def unfold_groups(
    groups: Iterable[ArrayLike],
    window: int = DEFAULT_WINDOW,
    trim: float = DEFAULT_TRIM,
) -> np.ndarray:
    """Unfolds each spectrum separately and pools the spacings."""
    pooled = [unfold(np.real(group), window, trim) for group in groups]
    if not pooled:
        raise DomainError("no spectra to unfold")
    return np.concatenate(pooled)


def spacing_histogram(
    spacings: ArrayLike,
    bins: int = 40,
    range: tuple[float, float] = (0.0, 4.0),
) -> SpacingHistogram:
    """
    Raises:
        DomainError: For an empty or negative sample, or when no sample falls in range.
    """
    values = _non_negative(np.asarray(spacings, dtype=float).reshape(-1))
    if values.size == 0:
        raise DomainError("cannot histogram an empty sample")
    return _density_histogram(values, bins, range, mean=float(values.mean()))


def _density_histogram(
    values: np.ndarray,
    bins: int,
    bounds: tuple[float, float],
    mean: float,
    out_of_range: int = 0,
) -> SpacingHistogram:
    if bins < 1:
        raise DomainError("at least one bin is needed")
    lo, hi = bounds
    inside = np.count_nonzero((values >= lo) & (values <= hi))
    if inside == 0:
        raise DomainError(f"no sample falls inside the histogram range [{lo}, {hi}]")
    densities, edges = np.histogram(values, bins=bins, range=bounds, density=True)
    return SpacingHistogram(
        bin_edges=edges,
        densities=densities,
        sample_count=int(values.size),
        mean_spacing=mean,
        out_of_range=out_of_range,
    )


def classify_spacings(
    spacings: ArrayLike,
    margin: float = CLASSIFY_MARGIN,
    min_samples: int = MIN_CLASSIFY_SAMPLES,
) -> SpacingClassification:
    """
    Kolmogorov-Smirnov distances to the Wigner and Poisson references.

    The label is Wigner when ks_wigner < ks_poisson - margin, Poisson in the reverse
    case and intermediate otherwise.

    Raises:
        DomainError: For fewer than `min_samples` spacings or a negative spacing.
    """
    values = _non_negative(np.asarray(spacings, dtype=float).reshape(-1))
    if values.size < min_samples:
        raise DomainError(
            f"classification needs at least {min_samples} spacings, got {values.size}"
        )
    ks_wigner = float(stats.kstest(values, wigner_cdf).statistic)
    ks_poisson = float(stats.kstest(values, poisson_cdf).statistic)

    if ks_wigner < ks_poisson - margin:
        label = SpacingClass.WIGNER
    elif ks_poisson < ks_wigner - margin:
        label = SpacingClass.POISSON
    else:
        label = SpacingClass.INTERMEDIATE

    log.info(
        "spacings_classified",
        label=label.value,
        ks_wigner=ks_wigner,
        ks_poisson=ks_poisson,
        samples=int(values.size),
    )
    return SpacingClassification(
        label=label,
        ks_wigner=ks_wigner,
        ks_poisson=ks_poisson,
        samples=int(values.size),
    )


# ---------------------------------------------------------------------------
# Decay rates
# ---------------------------------------------------------------------------


def imag_distribution(
    values: EigenvalueList | ArrayLike,
    gamma: float,
    bins: int = 20,
    scale: float | None = None,
) -> SpacingHistogram:
    """
    Histogram of the normalized decay rates -Im(lambda)/gamma over [0, 1].

    A decay rate outside [0, gamma] by more than 1e-9 * scale is counted in
    `out_of_range` and logged, then clipped into the range with the rest. For an
    ensemble `scale` is N * c; it defaults to gamma.

    Raises:
        DomainError: If gamma is not positive or there are no values.
    """
    if not gamma > 0.0:
        raise DomainError(
            "gamma must be positive; a closed system has no decay rates to normalize"
        )
    array = values.values if isinstance(values, EigenvalueList) else values
    array = np.asarray(array, dtype=np.complex128).reshape(-1)
    if array.size == 0:
        raise DomainError("no eigenvalues given")

    slack = IMAG_TOLERANCE * (gamma if scale is None else scale) / gamma
    rates = -array.imag / gamma
    outside = int(np.count_nonzero((rates < -slack) | (rates > 1.0 + slack)))
    if outside:
        log.warning("decay_rates_out_of_range", count=outside, gamma=gamma)
    rates = np.clip(rates, 0.0, 1.0)
    return _density_histogram(
        rates, bins, (0.0, 1.0), mean=float(rates.mean()), out_of_range=outside
    )


# ---------------------------------------------------------------------------
# Eigenvalue files
# ---------------------------------------------------------------------------


def ingest_eigenvalues(path: Path | str) -> EigenvalueList:
    """
    Reads an eigenvalue CSV: optional ``# source=...`` / ``# n=...`` comment lines,
    an optional ``re,im`` header, then one ``re,im`` pair per line.

    Raises:
        OSError: If the file cannot be read.
        ParseError: On a malformed line, with its 1-based line number.
        DomainError: If the file holds no eigenvalues.
    """
    path = Path(path)
    values: list[complex] = []
    source: str | None = None
    n: float | None = None
    header_allowed = True

    with path.open("rb") as handle:
        for lineno, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise ParseError("not valid UTF-8 text", line=lineno) from None
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                if key.strip() == "source":
                    source = value.strip()
                elif key.strip() == "n":
                    n = _parse_float(value, lineno)
                continue
            fields = [field.strip() for field in line.split(",")]
            if header_allowed and tuple(f.lower() for f in fields) == HEADER:
                header_allowed = False
                continue
            header_allowed = False
            if len(fields) != 2:
                raise ParseError(
                    f"expected 2 comma-separated fields, got {len(fields)}", line=lineno
                )
            re, im = (_parse_float(field, lineno) for field in fields)
            values.append(complex(re, im))

    if not values:
        raise DomainError(f"{path} contains no eigenvalues")
    log.info("eigenvalues_ingested", path=str(path), count=len(values), source=source)
    return EigenvalueList(values=np.array(values), source=source, n=n)


def _parse_float(text: str, lineno: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text.strip()!r}", line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value: {text.strip()!r}", line=lineno)
    return value


def export_eigenvalues(values: EigenvalueList | ArrayLike, path: Path | str) -> Path:
    """Writes the CSV read by `ingest_eigenvalues`; values read back bit-exact."""
    if not isinstance(values, EigenvalueList):
        values = EigenvalueList(values=values)
    comments = []
    if values.source is not None:
        comments.append(f"source={values.source}")
    if values.n is not None:
        comments.append(f"n={format_float(values.n)}")
    rows = ((v.real, v.imag) for v in values.values)
    return write_atomic(Path(path), render_csv(HEADER, rows, comments))
