from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class EigenvalueList(BaseModel):
    """Complex eigenvalues (k values or energies) with optional provenance."""

    values: np.ndarray
    source: str | None = None
    n: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def _finite_complex(cls, value) -> np.ndarray:
        array = np.asarray(value, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(array)):
            raise ValueError("eigenvalues must be finite")
        return array

    def __len__(self) -> int:
        return int(self.values.shape[0])


class SpacingHistogram(BaseModel):
    """
    Density-normalized histogram: sum(densities * widths) == 1.

    `out_of_range` counts samples that fell outside the histogram range by more than
    the caller's tolerance before being clipped into it.
    """

    bin_edges: np.ndarray
    densities: np.ndarray
    sample_count: int = Field(ge=0)
    mean_spacing: float
    out_of_range: int = Field(default=0, ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def rows(self) -> list[tuple[float, float, float]]:
        return [
            (float(left), float(right), float(density))
            for left, right, density in zip(
                self.bin_edges[:-1], self.bin_edges[1:], self.densities
            )
        ]


class SpacingClass(str, Enum):
    WIGNER = "Wigner"
    POISSON = "Poisson"
    INTERMEDIATE = "intermediate"


class SpacingClassification(BaseModel):
    label: SpacingClass
    ks_wigner: float = Field(ge=0.0, le=1.0)
    ks_poisson: float = Field(ge=0.0, le=1.0)
    samples: int = Field(ge=0)

    model_config = ConfigDict(frozen=True)
