from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class TwoLevelParams(BaseModel):
    """
    Parameters of the 2x2 open two-mode model.

    The matrix is [[eps1 - i*gamma1, c], [c, eps2 - i*gamma2]] with a real coupling c.
    """

    eps1: float
    eps2: float
    gamma1: float = Field(ge=0.0)
    gamma2: float = Field(ge=0.0)
    c: float

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @property
    def d_eps(self) -> float:
        return self.eps2 - self.eps1

    @property
    def d_gamma(self) -> float:
        return self.gamma2 - self.gamma1

    def matrix(self) -> np.ndarray:
        return np.array(
            [
                [self.eps1 - 1j * self.gamma1, self.c],
                [self.c, self.eps2 - 1j * self.gamma2],
            ],
            dtype=np.complex128,
        )


class TwoLevelResult(BaseModel):
    """
    Closed-form eigenpairs of the two-mode model.

    `states[0]` and `factors[0]` belong to `lambda_plus`, index 1 to `lambda_minus`.
    """

    lambda_plus: complex
    lambda_minus: complex
    discriminant: complex
    states: tuple[np.ndarray, np.ndarray]
    factors: tuple[float, float]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def max_factor(self) -> float:
        return max(self.factors)


class AxisSpec(BaseModel):
    """A uniform grid axis: `num` nodes from `start` to `stop` inclusive."""

    start: float
    stop: float
    num: int = Field(ge=0)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class PhaseMapGrid(BaseModel):
    d_eps_over_c: AxisSpec = AxisSpec(start=-5.0, stop=5.0, num=201)
    d_gamma_over_c: AxisSpec = AxisSpec(start=0.0, stop=4.0, num=201)

    model_config = ConfigDict(frozen=True)


class PhaseMap(BaseModel):
    """
    Delocalization factor over a (d_eps/c, d_gamma/c) grid.

    `f_values[i, j]` is the node at d_gamma_over_c[i], d_eps_over_c[j]; rows run over
    the d_gamma axis, so the row-major node order is d_gamma outer, d_eps inner.
    """

    d_eps_over_c: np.ndarray
    d_gamma_over_c: np.ndarray
    f_values: np.ndarray
    threshold: float = Field(default=0.5, gt=0.0, lt=1.0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def delocalized(self) -> np.ndarray:
        return self.f_values >= self.threshold

    def label(self, i: int, j: int) -> Literal["delocalized", "localized"]:
        return "delocalized" if self.f_values[i, j] >= self.threshold else "localized"


class EigenvalueCurves(BaseModel):
    """lambda_plus / lambda_minus along d_eps/c for several d_gamma/c values."""

    d_eps_over_c: np.ndarray
    d_gamma_over_c: np.ndarray
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("lambda_plus", "lambda_minus")
    @classmethod
    def _complex(cls, value: np.ndarray) -> np.ndarray:
        return np.asarray(value, dtype=np.complex128)
