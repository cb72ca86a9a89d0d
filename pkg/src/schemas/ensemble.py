import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class EnsembleParams(BaseModel):
    """
    One member of the random open-system ensemble.

    The matrix is fully determined by (seed, realization, N, c, gamma,
    complex_coupling).
    """

    N: int = Field(ge=2)
    c: float = Field(ge=0.0)
    gamma: float = Field(ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    realization: int = Field(default=0, ge=0)
    complex_coupling: bool = False

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class AiprResult(BaseModel):
    aipr: float
    per_state_ipr: np.ndarray
    params: EnsembleParams

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class SweepGrid(BaseModel):
    """Coupling bounds times opening strengths; sweep rows run c outer, gamma inner."""

    c_values: tuple[float, ...]
    gamma_values: tuple[float, ...]

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @model_validator(mode="after")
    def _non_negative(self) -> "SweepGrid":
        if any(v < 0.0 for v in self.c_values + self.gamma_values):
            raise ValueError("c and gamma values must be non-negative")
        return self


class SweepRow(BaseModel):
    c: float
    gamma: float
    N: int
    realizations: int
    aipr_mean: float
    aipr_stddev: float

    model_config = ConfigDict(frozen=True)

    @property
    def standard_error(self) -> float:
        return self.aipr_stddev / self.realizations**0.5
