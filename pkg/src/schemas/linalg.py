from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SolverOptions(BaseModel):
    """
    Options for the dense non-Hermitian eigensolver.

    `method="lapack"` hands the matrix to LAPACK's zgeev through scipy; `method="qr"`
    runs the in-repo balancing / Hessenberg / shifted QR / back-substitution pipeline.
    """

    method: Literal["lapack", "qr"] = "lapack"
    tol_res: float = Field(default=1e-10, gt=0.0)
    deflation_tol: float = Field(default=1e-14, gt=0.0)
    sweeps_per_dim: int = Field(default=30, ge=1)
    degeneracy_tol: float = Field(default=1e-8, ge=0.0)
    balance: bool = True

    model_config = ConfigDict(frozen=True)


class Spectrum(BaseModel):
    """
    All eigenpairs of a square complex matrix.

    Eigenvalues are sorted by ascending real part, ties by ascending imaginary part.
    Column i of `eigenvectors` belongs to `eigenvalues[i]` and has unit 2-norm.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int = Field(ge=0)
    method: Literal["lapack", "qr"]
    matrix_norm: float = Field(ge=0.0)
    near_degenerate: tuple[tuple[int, int], ...] = ()

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    @property
    def is_near_exceptional(self) -> bool:
        """True when at least two eigenvalues sit within the degeneracy tolerance."""
        return bool(self.near_degenerate)
