"""
Dense eigensolver for complex non-Hermitian matrices.

Two interchangeable back ends produce a `Spectrum`:

- ``lapack``: LAPACK zgeev through ``scipy.linalg.eig`` (balancing, Hessenberg
  reduction, shifted complex QR, triangular back-substitution).
- ``qr``: the same pipeline written out here, with scipy supplying the balancing and
  the Hessenberg reduction and the QR iteration done with Givens rotations.

Both share the post-processing: unit-norm eigenvectors with a fixed phase, sorting by
(real, imaginary) part, residuals, and the near-degeneracy flag.
"""

import cmath

import numpy as np
import scipy.linalg
import structlog
from numpy.typing import ArrayLike
from scipy.spatial import cKDTree

from src.core.exceptions import ConvergenceError, DimensionError, DomainError
from src.schemas.linalg import SolverOptions, Spectrum

log = structlog.get_logger()

# QR sweeps without deflation before an ad hoc shift breaks a possible cycle.
EXCEPTIONAL_SHIFT_PERIOD = 10

_DEFAULT_OPTIONS = SolverOptions()


def as_complex_matrix(M: ArrayLike) -> np.ndarray:
    """
    Validates `M` as a ComplexMatrix and returns a complex128 copy.

    Raises:
        DimensionError: If `M` is not a non-empty square matrix.
        DomainError: If any entry is NaN or infinite.
    """
    A = np.array(M, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] < 1:
        raise DimensionError("matrix must have at least one row")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def frobenius_norm(M: ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(M)))


def residual(M: ArrayLike, eigenvalue: complex, eigenvector: ArrayLike) -> float:
    """
    Returns ||M v - lambda v||_2 / ||v||_2.

    Raises:
        DimensionError: If the vector length does not match the matrix.
        DomainError: If the vector is zero.
    """
    A = as_complex_matrix(M)
    v = np.asarray(eigenvector, dtype=np.complex128).reshape(-1)
    if v.shape[0] != A.shape[0]:
        raise DimensionError(
            f"eigenvector has length {v.shape[0]}, matrix has dimension {A.shape[0]}"
        )
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DomainError("eigenvector must be nonzero")
    return float(np.linalg.norm(A @ v - eigenvalue * v) / norm)


def eigendecompose(M: ArrayLike, opts: SolverOptions | None = None) -> Spectrum:
    """
    Computes all eigenpairs of a dense complex matrix.

    Args:
        M: Square matrix with finite entries.
        opts: Solver options; defaults to LAPACK with the standard tolerances.

    Returns:
        The sorted Spectrum with residual diagnostics.

    Raises:
        DimensionError: If `M` is not square.
        DomainError: If `M` has non-finite entries.
        ConvergenceError: If the QR iteration exceeds its sweep budget.
    """
    opts = opts or _DEFAULT_OPTIONS
    A = as_complex_matrix(M)

    if opts.method == "lapack":
        try:
            w, V = scipy.linalg.eig(A, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"LAPACK QR iteration failed: {exc}") from exc
        iterations = 0
    else:
        w, V, iterations = _qr_eig(A, opts)

    return _finalize(A, w, V, iterations, opts)


def _finalize(
    A: np.ndarray, w: np.ndarray, V: np.ndarray, iterations: int, opts: SolverOptions
) -> Spectrum:
    n = A.shape[0]
    columns = np.arange(n)

    V = V / np.linalg.norm(V, axis=0)
    # Largest-modulus component real and positive.
    pivots = np.argmax(np.abs(V), axis=0)
    phases = V[pivots, columns]
    V = V * (np.conj(phases) / np.abs(phases))

    order = np.lexsort((w.imag, w.real))
    w = w[order]
    V = V[:, order]

    norm = frobenius_norm(A)
    residuals = np.linalg.norm(A @ V - V * w, axis=0)
    if residuals.max() > opts.tol_res * max(norm, np.finfo(float).tiny):
        log.warning(
            "residual_bound_exceeded",
            max_residual=float(residuals.max()),
            bound=opts.tol_res * norm,
            dim=n,
        )

    near = _near_degenerate_pairs(w, opts.degeneracy_tol * norm)
    if near:
        log.warning("near_exceptional_point", pairs=len(near), dim=n)

    return Spectrum(
        eigenvalues=w,
        eigenvectors=V,
        residuals=residuals,
        iterations=iterations,
        method=opts.method,
        matrix_norm=norm,
        near_degenerate=near,
    )


def _near_degenerate_pairs(w: np.ndarray, radius: float) -> tuple[tuple[int, int], ...]:
    if w.shape[0] < 2 or radius <= 0.0:
        return ()
    tree = cKDTree(np.column_stack([w.real, w.imag]))
    return tuple(sorted(tree.query_pairs(radius)))


# ---------------------------------------------------------------------------
# Reference QR pipeline
# ---------------------------------------------------------------------------


def _qr_eig(A: np.ndarray, opts: SolverOptions) -> tuple[np.ndarray, np.ndarray, int]:
    n = A.shape[0]
    if opts.balance:
        B, (scale, _) = scipy.linalg.matrix_balance(A, permute=False, separate=True)
    else:
        B, scale = A, np.ones(n)

    H, Q = scipy.linalg.hessenberg(B, calc_q=True)
    H = np.triu(np.asarray(H, dtype=np.complex128), -1)
    Z = np.asarray(Q, dtype=np.complex128)

    sweeps = _schur_reduce(H, Z, opts)
    Y = _triangular_eigenvectors(H)
    V = scale[:, None] * (Z @ Y)
    return np.diag(H).copy(), V, sweeps


def _schur_reduce(H: np.ndarray, Z: np.ndarray, opts: SolverOptions) -> int:
    """
    Reduces the Hessenberg matrix H to upper-triangular Schur form in place,
    accumulating the unitary rotations into Z. Returns the number of QR sweeps.
    """
    n = H.shape[0]
    max_sweeps = opts.sweeps_per_dim * n
    norm = np.linalg.norm(H)
    sweeps = 0
    stalled = 0
    hi = n - 1

    while hi > 0:
        lo = hi
        while lo > 0:
            scale = abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
            if scale == 0.0:
                scale = norm
            if abs(H[lo, lo - 1]) <= opts.deflation_tol * scale:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1

        if lo == hi:
            hi -= 1
            stalled = 0
            continue

        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"QR iteration did not converge within {max_sweeps} sweeps; "
                f"unconverged block rows {lo}..{hi}",
                iterations=sweeps,
                block=(lo, hi),
            )

        sweeps += 1
        stalled += 1
        if stalled % EXCEPTIONAL_SHIFT_PERIOD == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            mu = _wilkinson_shift(
                H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi]
            )
        _qr_sweep(H, Z, lo, hi, mu)

    return sweeps


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    """Eigenvalue of [[a, b], [c, d]] closest to d."""
    half = (a - d) / 2
    root = cmath.sqrt(half * half + b * c)
    mean = (a + d) / 2
    first, second = mean + root, mean - root
    return first if abs(first - d) <= abs(second - d) else second


def _givens(x: complex, y: complex) -> tuple[float, complex]:
    """
    Returns (c, s) with c real such that [[c, s], [-conj(s), c]] @ [x, y] = [r, 0].
    """
    ax, ay = abs(x), abs(y)
    if ay == 0.0:
        return 1.0, 0j
    if ax == 0.0:
        return 0.0, complex(np.conj(y)) / ay
    r = np.hypot(ax, ay)
    return ax / r, (x / ax) * complex(np.conj(y)) / r


def _qr_sweep(H: np.ndarray, Z: np.ndarray, lo: int, hi: int, mu: complex) -> None:
    """One implicit single-shift QR sweep (bulge chase) on the block lo..hi."""
    n = H.shape[0]
    x = H[lo, lo] - mu
    y = H[lo + 1, lo]
    for k in range(lo, hi):
        if k > lo:
            x = H[k, k - 1]
            y = H[k + 1, k - 1]
        c, s = _givens(x, y)
        sc = np.conj(s)

        first = lo if k == lo else k - 1
        top = H[k, first:n].copy()
        bottom = H[k + 1, first:n].copy()
        H[k, first:n] = c * top + s * bottom
        H[k + 1, first:n] = -sc * top + c * bottom

        last = min(k + 3, hi + 1)
        left = H[:last, k].copy()
        right = H[:last, k + 1].copy()
        H[:last, k] = c * left + sc * right
        H[:last, k + 1] = -s * left + c * right

        left = Z[:, k].copy()
        right = Z[:, k + 1].copy()
        Z[:, k] = c * left + sc * right
        Z[:, k + 1] = -s * left + c * right

        if k > lo:
            H[k + 1, k - 1] = 0.0


def _triangular_eigenvectors(T: np.ndarray) -> np.ndarray:
    """
    Eigenvectors of an upper-triangular matrix by back-substitution.

    Coincident diagonal entries (an exceptional point) get a perturbed pivot, which
    makes the returned vectors nearly parallel instead of failing.
    """
    n = T.shape[0]
    small = max(np.finfo(float).eps * np.linalg.norm(T), np.finfo(float).tiny)
    big = 1e100
    Y = np.zeros((n, n), dtype=np.complex128)
    for j in range(n):
        lam = T[j, j]
        Y[j, j] = 1.0
        for i in range(j - 1, -1, -1):
            pivot = T[i, i] - lam
            if abs(pivot) < small:
                pivot = small
            Y[i, j] = -(T[i, i + 1 : j + 1] @ Y[i + 1 : j + 1, j]) / pivot
            if abs(Y[i, j]) > big:
                Y[i : j + 1, j] /= abs(Y[i, j])
    return Y
