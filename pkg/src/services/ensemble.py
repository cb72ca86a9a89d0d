"""
Random open-system ensemble: H' = H0' - i*gamma*H1'.

H0' has diagonal energies eps_j uniform in (-1, 1) and symmetric couplings c_jk
uniform in (-c, c); H1' is diagonal with Gamma'_j uniform in (0, 1). Each matrix is
drawn from its own PCG64 stream keyed by (seed, realization), so a sample never depends
on which other samples were drawn before it or concurrently.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog
from numpy.typing import ArrayLike

from src.core.exceptions import DimensionError, DomainError
from src.schemas.ensemble import AiprResult, EnsembleParams, SweepGrid, SweepRow
from src.schemas.linalg import SolverOptions, Spectrum
from src.services.linalg import eigendecompose

log = structlog.get_logger()


def mean_level_spacing(n: int) -> float:
    """Mean spacing of n levels spread over the unperturbed band (-1, 1)."""
    if n < 1:
        raise DomainError("level count must be positive")
    return 2.0 / n


def _rng(seed: int, realization: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(realization,)))
    )


def _open_uniform(
    rng: np.random.Generator, low: float, high: float, size: int
) -> np.ndarray:
    """Uniform samples from the open interval (low, high)."""
    values = rng.uniform(low, high, size)
    rejected = (values <= low) | (values >= high)
    while rejected.any():
        values[rejected] = rng.uniform(low, high, int(rejected.sum()))
        rejected = (values <= low) | (values >= high)
    return values


def sample_hamiltonian(p: EnsembleParams) -> np.ndarray:
    rng = _rng(p.seed, p.realization)
    n = p.N
    rows, cols = np.triu_indices(n, k=1)

    eps = _open_uniform(rng, -1.0, 1.0, n)
    couplings = p.c * _open_uniform(rng, -1.0, 1.0, rows.size)
    if p.complex_coupling:
        couplings = couplings + 1j * p.c * _open_uniform(rng, -1.0, 1.0, rows.size)
    decay = p.gamma * _open_uniform(rng, 0.0, 1.0, n)

    H = np.zeros((n, n), dtype=np.complex128)
    H[rows, cols] = couplings
    H[cols, rows] = np.conj(couplings)
    H[np.arange(n), np.arange(n)] = eps - 1j * decay
    return H


def ipr(state: ArrayLike) -> float:
    """
    Inverse participation ratio sum |a_j|^4 / (sum |a_j|^2)^2.

    Raises:
        DomainError: If the state is the zero vector.
    """
    weights = np.abs(np.asarray(state, dtype=np.complex128).reshape(-1)) ** 2
    total = weights.sum()
    if total == 0.0:
        raise DomainError("IPR of the zero vector is undefined")
    return float((weights**2).sum() / total**2)


def aipr(spectrum: Spectrum, p: EnsembleParams) -> AiprResult:
    """
    Average IPR over all eigenvectors of a sampled matrix.

    Raises:
        DimensionError: If the spectrum does not have N eigenvectors.
    """
    if spectrum.dim != p.N or spectrum.eigenvectors.shape != (p.N, p.N):
        raise DimensionError(
            f"spectrum has {spectrum.dim} eigenpairs, ensemble dimension is {p.N}"
        )
    weights = np.abs(spectrum.eigenvectors) ** 2
    per_state = (weights**2).sum(axis=0) / weights.sum(axis=0) ** 2
    return AiprResult(aipr=float(per_state.mean()), per_state_ipr=per_state, params=p)


def realization_aipr(p: EnsembleParams, opts: SolverOptions | None = None) -> float:
    return aipr(eigendecompose(sample_hamiltonian(p), opts), p).aipr


def realization_eigenvalues(
    params: EnsembleParams, realizations: int, opts: SolverOptions | None = None
) -> list[np.ndarray]:
    """Eigenvalues of realizations 0..realizations-1 of `params`, one array each."""
    if realizations < 1:
        raise DomainError("at least one realization is needed")
    return [
        eigendecompose(
            sample_hamiltonian(params.model_copy(update={"realization": r})), opts
        ).eigenvalues
        for r in range(realizations)
    ]


def pooled_eigenvalues(
    params: EnsembleParams, realizations: int, opts: SolverOptions | None = None
) -> np.ndarray:
    return np.concatenate(realization_eigenvalues(params, realizations, opts))


def node_seed(seed: int, c_index: int, gamma_index: int) -> int:
    """Seed of one sweep node, derived from the master seed and the node indices."""
    state = np.random.SeedSequence(seed, spawn_key=(c_index, gamma_index))
    return int(state.generate_state(1, dtype=np.uint64)[0])


def sweep(
    grid: SweepGrid,
    N: int,
    realizations: int,
    seed: int,
    *,
    workers: int = 1,
    opts: SolverOptions | None = None,
    complex_coupling: bool = False,
) -> list[SweepRow]:
    """
    Mean and spread of the AIPR over a (c, gamma) grid.

    Rows come out in grid order (c outer, gamma inner) whatever the number of workers.

    Raises:
        DomainError: If the grid is empty or realizations < 1.
    """
    if not grid.c_values or not grid.gamma_values:
        raise DomainError("sweep grid is empty")
    if realizations < 1:
        raise DomainError("at least one realization is needed")
    if N < 2:
        raise DomainError("ensemble dimension must be at least 2")

    nodes = [
        (ci, gi, c, gamma)
        for ci, c in enumerate(grid.c_values)
        for gi, gamma in enumerate(grid.gamma_values)
    ]

    def run_node(node: tuple[int, int, float, float]) -> SweepRow:
        ci, gi, c, gamma = node
        base = EnsembleParams(
            N=N,
            c=c,
            gamma=gamma,
            seed=node_seed(seed, ci, gi),
            complex_coupling=complex_coupling,
        )
        values = np.array(
            [
                realization_aipr(base.model_copy(update={"realization": r}), opts)
                for r in range(realizations)
            ]
        )
        stddev = float(values.std(ddof=1)) if realizations > 1 else 0.0
        log.info(
            "sweep_node_done", c=c, gamma=gamma, aipr=float(values.mean()), N=N
        )
        return SweepRow(
            c=c,
            gamma=gamma,
            N=N,
            realizations=realizations,
            aipr_mean=float(values.mean()),
            aipr_stddev=stddev,
        )

    log.info("sweep_started", nodes=len(nodes), N=N, realizations=realizations)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_node, nodes))
    return [run_node(node) for node in nodes]
