"""
Closed-form two-mode model around an exceptional point.

The model matrix is [[eps1 - i*Gamma1, c], [c, eps2 - i*Gamma2]]. In the scaled
variables x = d_eps/c and y = d_gamma/c the discriminant is

    box = x**2 - y**2 + 4 - 2i*x*y

and the eigenvalues are (eps1 + eps2 - i(Gamma1 + Gamma2) +/- c*sqrt(box)) / 2 with the
principal square root. The first component of the (unnormalized) eigenstate with second
component 1 is (-x + i*y +/- sqrt(box)) / 2.
"""

import cmath
import math
from typing import Sequence

import numpy as np
import structlog
from numpy.typing import ArrayLike

from src.core.exceptions import (
    ContinuationError,
    DimensionError,
    DomainError,
    GeometryError,
)
from src.schemas.two_level import (
    AxisSpec,
    EigenvalueCurves,
    PhaseMap,
    PhaseMapGrid,
    TwoLevelParams,
    TwoLevelResult,
)

log = structlog.get_logger()

DEFAULT_ANCHOR = TwoLevelParams(eps1=1.0, eps2=1.0, gamma1=1.0, gamma2=1.0, c=1.0)

NORM_TOL = 1e-9
EP_CLEARANCE = 1e-6
AMBIGUITY_TOL = 1e-12
MAX_STEP_HALVINGS = 20
MIN_LOOP_STEPS = 16

Pair = tuple[complex, complex]


def discriminant(d_eps_over_c: ArrayLike, d_gamma_over_c: ArrayLike) -> np.ndarray:
    x = np.asarray(d_eps_over_c, dtype=float)
    y = np.asarray(d_gamma_over_c, dtype=float)
    box = x * x - y * y + 4.0 - 2j * x * y
    # Adding +0j turns a -0.0 imaginary part into +0.0, so negative reals take the
    # upper lip of the branch cut.
    return box + 0j


def _first_components(x: ArrayLike, y: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    root = np.sqrt(discriminant(x, y))
    base = -x + 1j * y
    return 0.5 * (base + root), 0.5 * (base - root)


def _factor_from_first(a: np.ndarray) -> np.ndarray:
    """F of the state (a, 1) up to normalization: min/max of the component weights."""
    weight = np.abs(a) ** 2
    return np.minimum(weight, 1.0) / np.maximum(weight, 1.0)


def _normalized(a: complex) -> np.ndarray:
    state = np.array([a, 1.0], dtype=np.complex128)
    return state / np.linalg.norm(state)


def eigenpairs_2x2(p: TwoLevelParams, scaled: bool = True) -> TwoLevelResult:
    """
    Closed-form eigenvalues and normalized eigenstates of the two-mode model.

    Args:
        p: Model parameters.
        scaled: Use the scaled-variable formulation (requires c != 0). With
            `scaled=False` the principal root of c**2 * box is taken instead, which
            also covers the uncoupled case c = 0.

    Raises:
        DomainError: If `scaled` is requested with c = 0.
    """
    centre = 0.5 * (p.eps1 + p.eps2 - 1j * (p.gamma1 + p.gamma2))

    if scaled:
        if p.c == 0.0:
            raise DomainError("scaled variables d_eps/c, d_gamma/c need c != 0")
        x, y = p.d_eps / p.c, p.d_gamma / p.c
        box = complex(discriminant(x, y))
        root = cmath.sqrt(box)
        lambda_plus = centre + 0.5 * p.c * root
        lambda_minus = centre - 0.5 * p.c * root
        a_plus = 0.5 * (-x + 1j * y + root)
        a_minus = 0.5 * (-x + 1j * y - root)
        states = (_normalized(a_plus), _normalized(a_minus))
    else:
        unscaled = (p.d_eps - 1j * p.d_gamma) ** 2 + 4.0 * p.c**2 + 0j
        root = cmath.sqrt(unscaled)
        lambda_plus = centre + 0.5 * root
        lambda_minus = centre - 0.5 * root
        box = unscaled / p.c**2 if p.c != 0.0 else complex("nan")
        states = (
            _null_vector(p, lambda_plus, first=True),
            _null_vector(p, lambda_minus, first=False),
        )

    factors = (delocalization_factor(states[0]), delocalization_factor(states[1]))
    return TwoLevelResult(
        lambda_plus=lambda_plus,
        lambda_minus=lambda_minus,
        discriminant=box,
        states=states,
        factors=factors,
    )


def _null_vector(p: TwoLevelParams, lam: complex, first: bool) -> np.ndarray:
    if p.c != 0.0:
        return _normalized((lam - p.eps2 + 1j * p.gamma2) / p.c)
    d1 = p.eps1 - 1j * p.gamma1
    d2 = p.eps2 - 1j * p.gamma2
    if abs(lam - d1) < abs(lam - d2) or (abs(lam - d1) == abs(lam - d2) and first):
        return np.array([1.0, 0.0], dtype=np.complex128)
    return np.array([0.0, 1.0], dtype=np.complex128)


def delocalization_factor(state: ArrayLike, tol: float = NORM_TOL) -> float:
    """
    F = (1 - R) / R with R = max(|a1|^2, |a2|^2) for a normalized 2-vector.

    Raises:
        DimensionError: If the state does not have two components.
        DomainError: If the state is not normalized within `tol`.
    """
    v = np.asarray(state, dtype=np.complex128).reshape(-1)
    if v.shape != (2,):
        raise DimensionError(f"expected a 2-component state, got {v.shape[0]}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise DomainError(f"state is not normalized (norm {norm!r})")
    weights = np.abs(v) ** 2
    return float(weights.min() / weights.max())


def exceptional_points(c: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """
    The two EPs in absolute (d_eps, d_gamma) units: (0, 2c) and (0, -2c).

    Raises:
        DomainError: If c is zero or not finite.
    """
    if not math.isfinite(c) or c == 0.0:
        raise DomainError("exceptional points need a finite nonzero coupling")
    return (0.0, 2.0 * c), (0.0, -2.0 * c)


def params_at(anchor: TwoLevelParams, d_eps: float, d_gamma: float) -> TwoLevelParams:
    """
    Model with eps1, Gamma1, c from `anchor` and the given differences.

    When Gamma1 + d_gamma would be negative both decay rates are raised by the same
    amount, which shifts both eigenvalues by the same imaginary constant.
    """
    gamma2 = anchor.gamma1 + d_gamma
    shift = max(0.0, -gamma2)
    return TwoLevelParams(
        eps1=anchor.eps1,
        eps2=anchor.eps1 + d_eps,
        gamma1=anchor.gamma1 + shift,
        gamma2=gamma2 + shift,
        c=anchor.c,
    )


def _eigenvalue_pair(anchor: TwoLevelParams, d_eps: float, d_gamma: float) -> Pair:
    x, y = d_eps / anchor.c, d_gamma / anchor.c
    root = cmath.sqrt(complex(discriminant(x, y)))
    centre = anchor.eps1 + 0.5 * d_eps - 1j * (anchor.gamma1 + 0.5 * d_gamma)
    return centre + 0.5 * anchor.c * root, centre - 0.5 * anchor.c * root


def encircle_ep(
    center: tuple[float, float],
    radius: float,
    steps: int,
    p0: TwoLevelParams,
) -> tuple[int, int]:
    """
    Follows both eigenvalues once around a circle in the (d_eps, d_gamma) plane.

    The eigenvalues are continued by nearest neighbour from node to node; a node
    interval whose two continuations are equally close is halved until they are not.

    Returns:
        (1, 2) when each eigenvalue returns to itself, (2, 1) when they are exchanged.

    Raises:
        DomainError: For fewer than 16 steps, a non-positive radius or c = 0.
        GeometryError: If the circle passes within 1e-6 of an EP.
        ContinuationError: If step halving cannot resolve an ambiguous continuation.
    """
    if steps < MIN_LOOP_STEPS:
        raise DomainError(f"at least {MIN_LOOP_STEPS} steps are needed, got {steps}")
    if not radius > 0.0:
        raise DomainError("loop radius must be positive")

    cx, cy = center
    for ep in exceptional_points(p0.c):
        clearance = abs(math.hypot(cx - ep[0], cy - ep[1]) - radius)
        if clearance < EP_CLEARANCE:
            raise GeometryError(
                f"loop passes within {clearance:.3g} of the exceptional point {ep}"
            )

    def pair_at(theta: float) -> Pair:
        return _eigenvalue_pair(
            p0, cx + radius * math.cos(theta), cy + radius * math.sin(theta)
        )

    refinements = 0

    def advance(tracked: Pair, start: float, stop: float, depth: int) -> Pair:
        nonlocal refinements
        candidate = pair_at(stop)
        same = abs(tracked[0] - candidate[0]) + abs(tracked[1] - candidate[1])
        swap = abs(tracked[0] - candidate[1]) + abs(tracked[1] - candidate[0])
        if abs(same - swap) > AMBIGUITY_TOL:
            return candidate if same < swap else (candidate[1], candidate[0])
        if depth >= MAX_STEP_HALVINGS:
            raise ContinuationError(
                f"ambiguous eigenvalue continuation near theta={stop:.6f}; "
                "increase the number of steps"
            )
        refinements += 1
        middle = 0.5 * (start + stop)
        tracked = advance(tracked, start, middle, depth + 1)
        return advance(tracked, middle, stop, depth + 1)

    initial = pair_at(0.0)
    tracked = initial
    for k in range(steps):
        start = 2.0 * math.pi * k / steps
        stop = 2.0 * math.pi * (k + 1) / steps
        tracked = advance(tracked, start, stop, 0)

    same = abs(tracked[0] - initial[0]) + abs(tracked[1] - initial[1])
    swap = abs(tracked[0] - initial[1]) + abs(tracked[1] - initial[0])
    permutation = (1, 2) if same <= swap else (2, 1)
    log.info(
        "ep_loop_closed",
        center=center,
        radius=radius,
        steps=steps,
        refinements=refinements,
        permutation=permutation,
    )
    return permutation


def phase_map(
    grid: PhaseMapGrid | None = None,
    F_c: float = 0.5,
    anchor: TwoLevelParams = DEFAULT_ANCHOR,
) -> PhaseMap:
    """
    Delocalization factor over a (d_eps/c, d_gamma/c) grid, classified against F_c.

    Each node varies eps2 and Gamma2 around the anchor's eps1, Gamma1 and c and keeps
    the larger F of the two branches. F depends on the scaled differences only, so the
    grid is evaluated in one vectorized pass.

    Raises:
        DomainError: For an empty or non-monotone axis, F_c outside (0, 1) or c = 0.
    """
    grid = grid or PhaseMapGrid()
    if not 0.0 < F_c < 1.0:
        raise DomainError(f"F_c must lie in (0, 1), got {F_c}")
    if anchor.c == 0.0:
        raise DomainError("phase map axes are scaled by c and need c != 0")

    x = _axis_values(grid.d_eps_over_c, "d_eps_over_c")
    y = _axis_values(grid.d_gamma_over_c, "d_gamma_over_c")

    X, Y = np.meshgrid(x, y)
    a_plus, a_minus = _first_components(X, Y)
    f_values = np.maximum(_factor_from_first(a_plus), _factor_from_first(a_minus))

    log.info(
        "phase_map_computed",
        nodes=int(f_values.size),
        delocalized=int(np.count_nonzero(f_values >= F_c)),
        threshold=F_c,
    )
    return PhaseMap(
        d_eps_over_c=x, d_gamma_over_c=y, f_values=f_values, threshold=F_c
    )


def _axis_values(axis: AxisSpec, name: str) -> np.ndarray:
    values = axis.values()
    if values.size == 0:
        raise DomainError(f"grid axis {name} is empty")
    steps = np.diff(values)
    if values.size > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise DomainError(f"grid axis {name} is not monotone")
    return values


def eigenvalue_curves(
    d_eps_over_c: AxisSpec,
    d_gamma_over_c: Sequence[float],
    anchor: TwoLevelParams = DEFAULT_ANCHOR,
) -> EigenvalueCurves:
    """
    Real and imaginary parts of both branches along d_eps/c, one curve per d_gamma/c.

    Row i of the returned arrays belongs to d_gamma_over_c[i].
    """
    if anchor.c == 0.0:
        raise DomainError("curves are parametrized by d_eps/c and need c != 0")
    x = _axis_values(d_eps_over_c, "d_eps_over_c")
    y = np.asarray(list(d_gamma_over_c), dtype=float)
    if y.size == 0:
        raise DomainError("at least one d_gamma/c value is needed")

    X, Y = np.meshgrid(x, y)
    root = np.sqrt(discriminant(X, Y))
    c = anchor.c
    centre = anchor.eps1 + 0.5 * c * X - 1j * (anchor.gamma1 + 0.5 * c * Y)
    return EigenvalueCurves(
        d_eps_over_c=x,
        d_gamma_over_c=y,
        lambda_plus=centre + 0.5 * c * root,
        lambda_minus=centre - 0.5 * c * root,
    )
