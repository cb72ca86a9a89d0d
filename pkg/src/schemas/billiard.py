import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class StadiumGeometry(BaseModel):
    """
    Two semicircles of radius R joined by straight segments from x = -a to x = a.

    The half length defaults to the radius, i.e. a square of side 2R between the caps.
    """

    radius: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    half_length: float | None = Field(default=None, gt=0.0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @property
    def a(self) -> float:
        return self.radius if self.half_length is None else self.half_length

    @property
    def quarter_arc(self) -> float:
        return 0.5 * math.pi * self.radius

    @property
    def perimeter(self) -> float:
        return 4.0 * self.a + 2.0 * math.pi * self.radius


class PeriodicOrbit(BaseModel):
    """
    A closed billiard orbit; the last bounce connects back to the first.

    `points[i]` is the boundary position at arclength `arclengths[i]`.
    """

    name: str | None = None
    arclengths: np.ndarray
    points: np.ndarray
    length: float = Field(gt=0.0)
    reflection_residual: float = Field(ge=0.0)
    iterations: int = Field(default=0, ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def bounces(self) -> int:
        return int(self.arclengths.shape[0])

    @property
    def dk_star(self) -> float:
        return 4.0 * math.pi / self.length


class OrbitFamilyStats(BaseModel):
    mean_dk: float
    dk_star: float = Field(gt=0.0)
    alpha: float = Field(ge=0.0)
    sigma: float = Field(ge=0.0)

    model_config = ConfigDict(frozen=True)


class PublishedColumn(BaseModel):
    """One column of the published mode-spacing table (three printed decimals)."""

    label: str
    mean_dk: float
    dk_star: float
    alpha: float
    sigma: float

    model_config = ConfigDict(frozen=True)
