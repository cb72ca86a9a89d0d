"""
Stadium billiard geometry and periodic orbits.

The boundary is parametrized by arclength s in [0, perimeter): s = 0 at the rightmost
point (a + R, 0), increasing counterclockwise. Periodic orbits are found as critical
points of the total length L(s_1, ..., s_n) of the closed polygon through the bounce
points, with Newton's method on grad L using the analytic Hessian.
"""

import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import structlog
from numpy.typing import ArrayLike

from src.core.exceptions import (
    ConvergenceError,
    DegenerateOrbitError,
    DomainError,
    GeometryError,
    OpenLocError,
)
from src.schemas.billiard import (
    OrbitFamilyStats,
    PeriodicOrbit,
    PublishedColumn,
    StadiumGeometry,
)

log = structlog.get_logger()

GRADIENT_TOL = 1e-12
MAX_ITERATIONS = 200
MAX_STEP_HALVINGS = 40
COLLAPSE_TOL = 1e-8
CHORD_CLEARANCE = 1e-10
REFLECTION_TOL = 1e-9

DEFAULT_GEOMETRY = StadiumGeometry()


def _column(
    label: str, mean_dk: float, dk_star: float, alpha: float, sigma: float
) -> PublishedColumn:
    return PublishedColumn(
        label=label, mean_dk=mean_dk, dk_star=dk_star, alpha=alpha, sigma=sigma
    )


# Printed mode-spacing table: <dk>, dk*, alpha and sigma per orbit family.
PUBLISHED_SPACINGS: dict[str, PublishedColumn] = {
    column.label: column
    for column in (
        _column("R", 1.292, 1.301, 0.007, 0.038),
        _column("A", 1.332, 1.360, 0.021, 0.067),
        _column("A2", 1.352, 1.360, 0.006, 0.054),
        _column("D", 1.278, 1.405, 0.090, 0.018),
        _column("D2", 1.379, 1.405, 0.019, 0.013),
        _column("T", 1.326, 1.400, 0.053, 0.005),
        _column("HBB", 1.553, 1.571, 0.011, 0.152),
        _column("F", 1.261, 1.364, 0.076, 0.095),
        _column("B", 1.233, 1.209, 0.020, 0.107),
        _column("B2", 1.211, 1.209, 0.002, 0.061),
        _column("C", 0.966, 0.952, 0.015, 0.060),
    )
}

ORBIT_NAMES = {
    "R": "rectangle",
    "A": "arrowhead",
    "D": "diamond",
    "T": "triangle",
    "HBB": "horizontal bouncing ball",
    "F": "fish",
    "B": "bowtie",
    "C": "candy",
}

# Bounce points of the builtin orbits, relative to the geometry: ("cap", angle at the
# cap centre) or ("top" / "bottom", x / a). Exact for a = R, close seeds otherwise.
_THETA_A = math.acos(1.0 / 3.0)
_PHI_T = 0.890959
_THETA_C = 1.280129
_SEEDS: dict[str, tuple[tuple[str, float], ...]] = {
    "R": (
        ("cap", 0.25 * math.pi),
        ("cap", 0.75 * math.pi),
        ("cap", 1.25 * math.pi),
        ("cap", 1.75 * math.pi),
    ),
    "A": (
        ("cap", _THETA_A),
        ("cap", 0.0),
        ("cap", 2.0 * math.pi - _THETA_A),
        ("cap", math.pi),
    ),
    "D": (("cap", 0.0), ("top", 0.0), ("cap", math.pi), ("bottom", 0.0)),
    "T": (("cap", 0.0), ("cap", math.pi - _PHI_T), ("cap", math.pi + _PHI_T)),
    "HBB": (("cap", 0.0), ("cap", math.pi)),
    "F": (
        ("cap", 0.426167),
        ("top", 0.547156),
        ("cap", 3.235764),
        ("cap", 5.232727),
    ),
    "B": (
        ("cap", math.pi / 3.0),
        ("cap", 4.0 * math.pi / 3.0),
        ("cap", 2.0 * math.pi / 3.0),
        ("cap", 5.0 * math.pi / 3.0),
    ),
    "C": (
        ("cap", math.pi + _THETA_C),
        ("cap", math.pi - _THETA_C),
        ("bottom", 0.0),
        ("cap", _THETA_C),
        ("cap", 2.0 * math.pi - _THETA_C),
        ("top", 0.0),
    ),
}

# Marginal orbits, returned as constructed.
_EXACT = frozenset({"HBB"})


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def _frame(s: float, g: StadiumGeometry) -> tuple[np.ndarray, np.ndarray, float]:
    """Position, unit tangent (counterclockwise) and curvature at arclength s."""
    R, a, q = g.radius, g.a, g.quarter_arc
    s = s % g.perimeter

    if s < q:
        theta = s / R
        centre, curvature = (a, 0.0), 1.0 / R
    elif s < q + 2.0 * a:
        x = a - (s - q)
        return np.array([x, R]), np.array([-1.0, 0.0]), 0.0
    elif s < 3.0 * q + 2.0 * a:
        theta = 0.5 * math.pi + (s - q - 2.0 * a) / R
        centre, curvature = (-a, 0.0), 1.0 / R
    elif s < 3.0 * q + 4.0 * a:
        x = -a + (s - 3.0 * q - 2.0 * a)
        return np.array([x, -R]), np.array([1.0, 0.0]), 0.0
    else:
        theta = 1.5 * math.pi + (s - 3.0 * q - 4.0 * a) / R
        centre, curvature = (a, 0.0), 1.0 / R

    c, sn = math.cos(theta), math.sin(theta)
    position = np.array([centre[0] + R * c, centre[1] + R * sn])
    return position, np.array([-sn, c]), curvature


def _inward(tangent: np.ndarray) -> np.ndarray:
    return np.array([-tangent[1], tangent[0]])


def boundary_point(
    s: float, geometry: StadiumGeometry = DEFAULT_GEOMETRY
) -> tuple[np.ndarray, np.ndarray]:
    """
    Position and inward unit normal at arclength s (reduced modulo the perimeter).
    """
    position, tangent, _ = _frame(s, geometry)
    return position, _inward(tangent)


def arclength_on_cap(
    angle: float, geometry: StadiumGeometry = DEFAULT_GEOMETRY
) -> float:
    """
    Arclength of the cap point at `angle`, measured at the centre of its own cap.

    Angles in [-pi/2, pi/2] (mod 2*pi) address the right cap, the rest the left cap.
    """
    R, a = geometry.radius, geometry.a
    theta = angle % (2.0 * math.pi)
    if theta <= 0.5 * math.pi:
        return R * theta
    if theta < 1.5 * math.pi:
        return 2.0 * a + R * theta
    return (4.0 * a + R * theta) % geometry.perimeter


def arclength_on_straight(
    x: float, upper: bool = True, geometry: StadiumGeometry = DEFAULT_GEOMETRY
) -> float:
    """
    Raises:
        GeometryError: If x is outside [-a, a].
    """
    a, q = geometry.a, geometry.quarter_arc
    if abs(x) > a:
        raise GeometryError(f"x={x} is not on a straight segment [-{a}, {a}]")
    if upper:
        return q + (a - x)
    return 3.0 * q + 2.0 * a + (x + a)


def signed_distance(
    point: ArrayLike, geometry: StadiumGeometry = DEFAULT_GEOMETRY
) -> float:
    """Distance to the boundary, positive inside."""
    x, y = np.asarray(point, dtype=float)
    a = geometry.a
    nearest = min(max(x, -a), a)
    return geometry.radius - math.hypot(x - nearest, y)


def contains(
    point: ArrayLike,
    margin: float = 0.0,
    geometry: StadiumGeometry = DEFAULT_GEOMETRY,
) -> bool:
    return signed_distance(point, geometry) > margin


# ---------------------------------------------------------------------------
# Orbit length
# ---------------------------------------------------------------------------


def orbit_length(points: ArrayLike) -> float:
    """
    Perimeter of the closed polygon through the bounce points.

    Raises:
        DomainError: For fewer than two points.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] < 2:
        raise DomainError("an orbit needs at least two 2D bounce points")
    return float(np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1).sum())


def dk_star(l: float) -> float:
    """Mode spacing 4*pi/l expected from the quantized orbit length l."""
    if not l > 0.0:
        raise DomainError(f"orbit length must be positive, got {l}")
    return 4.0 * math.pi / l


def _gradient_hessian(
    s: np.ndarray, g: StadiumGeometry
) -> tuple[np.ndarray, np.ndarray]:
    n = s.shape[0]
    frames = [_frame(si, g) for si in s]
    grad = np.zeros(n)
    hess = np.zeros((n, n))

    for i in range(n):
        j = (i + 1) % n
        (pa, ta, ka), (pb, tb, kb) = frames[i], frames[j]
        chord = pb - pa
        ell = float(np.hypot(*chord))
        u = chord / ell
        tau_a, tau_b = float(ta @ u), float(tb @ u)

        grad[i] -= tau_a
        grad[j] += tau_b
        hess[i, i] += -ka * float(_inward(ta) @ u) + (1.0 - tau_a**2) / ell
        hess[j, j] += kb * float(_inward(tb) @ u) + (1.0 - tau_b**2) / ell
        cross = -(float(ta @ tb) - tau_a * tau_b) / ell
        hess[i, j] += cross
        hess[j, i] += cross

    return grad, hess


def _check_collapse(s: np.ndarray, g: StadiumGeometry, error=DegenerateOrbitError):
    P = g.perimeter
    order = np.sort(s % P)
    gaps = np.diff(np.append(order, order[0] + P))
    if gaps.min() < COLLAPSE_TOL:
        raise error(f"bounce points collapsed (arclength gap {gaps.min():.3g})")


def refine_orbit(
    initial: Sequence[float],
    geometry: StadiumGeometry = DEFAULT_GEOMETRY,
    name: str | None = None,
) -> PeriodicOrbit:
    """
    Refines bounce arclengths to a periodic orbit with damped Newton steps on grad L.

    A full Newton step is halved until the gradient norm does not grow.

    Raises:
        DomainError: For fewer than two distinct initial bounce points.
        ConvergenceError: If |grad L| > 1e-12 after 200 iterations.
        DegenerateOrbitError: If two bounce points collapse within 1e-8 arclength.
        GeometryError: If a chord runs along the boundary or the reflection law fails.
    """
    P = geometry.perimeter
    s = np.mod(np.asarray(initial, dtype=float).reshape(-1), P)
    if s.size < 2:
        raise DomainError("an orbit needs at least two bounce points")
    _check_collapse(s, geometry, error=DomainError)

    grad, hess = _gradient_hessian(s, geometry)
    gnorm = float(np.linalg.norm(grad))
    iterations = 0
    while gnorm > GRADIENT_TOL:
        if iterations >= MAX_ITERATIONS:
            raise ConvergenceError(
                f"orbit refinement did not converge in {MAX_ITERATIONS} iterations "
                f"(|grad L| = {gnorm:.3g})",
                iterations=iterations,
            )
        iterations += 1
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]

        damping = 1.0
        for _ in range(MAX_STEP_HALVINGS):
            trial = np.mod(s - damping * step, P)
            damping *= 0.5
            try:
                _check_collapse(trial, geometry)
            except DegenerateOrbitError:
                continue
            trial_grad, _ = _gradient_hessian(trial, geometry)
            trial_norm = float(np.linalg.norm(trial_grad))
            if trial_norm <= gnorm:
                break
        _check_collapse(trial, geometry)
        s = trial
        grad, hess = _gradient_hessian(s, geometry)
        gnorm = float(np.linalg.norm(grad))

    orbit = _build_orbit(s, geometry, name, iterations)
    log.info(
        "orbit_refined",
        name=name,
        bounces=orbit.bounces,
        length=orbit.length,
        dk_star=orbit.dk_star,
        iterations=iterations,
    )
    return orbit


def _build_orbit(
    s: np.ndarray, g: StadiumGeometry, name: str | None, iterations: int
) -> PeriodicOrbit:
    frames = [_frame(si, g) for si in s]
    points = np.array([frame[0] for frame in frames])
    n = points.shape[0]

    residual = 0.0
    for i in range(n):
        before, here, after = points[i - 1], points[i], points[(i + 1) % n]
        midpoint = 0.5 * (here + after)
        if signed_distance(midpoint, g) <= CHORD_CLEARANCE:
            raise GeometryError(
                f"chord {i} of orbit {name or '?'} runs along the boundary"
            )
        tangent = frames[i][1]
        normal = _inward(tangent)
        u_in = (here - before) / np.linalg.norm(here - before)
        u_out = (after - here) / np.linalg.norm(after - here)
        angle_in = math.atan2(float(tangent @ u_in), -float(normal @ u_in))
        angle_out = math.atan2(float(tangent @ u_out), float(normal @ u_out))
        residual = max(residual, abs(angle_in - angle_out))

    if residual > REFLECTION_TOL:
        raise GeometryError(
            f"reflection law violated by {residual:.3g} rad on orbit {name or '?'}"
        )
    return PeriodicOrbit(
        name=name,
        arclengths=s.copy(),
        points=points,
        length=orbit_length(points),
        reflection_residual=residual,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Builtin orbits
# ---------------------------------------------------------------------------


def builtin_orbits(
    geometry: StadiumGeometry = DEFAULT_GEOMETRY,
) -> dict[str, list[float]]:
    """Initial bounce arclengths of the named short orbits, keyed by abbreviation."""
    seeds: dict[str, list[float]] = {}
    for label, bounces in _SEEDS.items():
        arclengths = []
        for kind, value in bounces:
            if kind == "cap":
                arclengths.append(arclength_on_cap(value, geometry))
            else:
                arclengths.append(
                    arclength_on_straight(value * geometry.a, kind == "top", geometry)
                )
        seeds[label] = arclengths
    return seeds


def refine_builtin(
    label: str, geometry: StadiumGeometry = DEFAULT_GEOMETRY
) -> PeriodicOrbit:
    """
    Refines one builtin orbit; the bouncing ball is marginal and returned as is.

    Raises:
        DomainError: For an unknown label.
    """
    seeds = builtin_orbits(geometry)
    if label not in seeds:
        raise DomainError(f"unknown orbit {label!r}; choose from {', '.join(seeds)}")
    s = np.asarray(seeds[label])
    if label in _EXACT:
        return _build_orbit(np.mod(s, geometry.perimeter), geometry, label, 0)
    return refine_orbit(s, geometry, name=label)


def refine_all(
    geometry: StadiumGeometry = DEFAULT_GEOMETRY, workers: int = 1
) -> tuple[list[PeriodicOrbit], dict[str, OpenLocError]]:
    """
    Refines every builtin orbit. Returns the orbits in builtin order and the failures
    keyed by label.
    """

    def attempt(label: str) -> PeriodicOrbit | OpenLocError:
        try:
            return refine_builtin(label, geometry)
        except OpenLocError as exc:
            log.error("orbit_refinement_failed", name=label, error=str(exc))
            return exc

    labels = list(_SEEDS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, labels))
    else:
        outcomes = [attempt(label) for label in labels]

    orbits = [o for o in outcomes if isinstance(o, PeriodicOrbit)]
    failures = {
        label: o for label, o in zip(labels, outcomes) if isinstance(o, OpenLocError)
    }
    return orbits, failures


# ---------------------------------------------------------------------------
# Mode spacings
# ---------------------------------------------------------------------------


def alpha(mean_dk: float, dk_star: float) -> float:
    """Relative deviation |(<dk> - dk*) / dk*|."""
    if not dk_star > 0.0:
        raise DomainError("dk_star must be positive")
    return abs((mean_dk - dk_star) / dk_star)


def equidistance_stats(k_reals: ArrayLike, dk_star: float) -> OrbitFamilyStats:
    """
    Mean and population standard deviation of successive mode spacings.

    Raises:
        DomainError: For fewer than three values, unsorted values or dk_star <= 0.
    """
    k = np.asarray(k_reals, dtype=float).reshape(-1)
    if k.size < 3:
        raise DomainError("at least three mode wavenumbers are needed")
    spacings = np.diff(k)
    if np.any(spacings < 0.0):
        raise DomainError("mode wavenumbers must be sorted in ascending order")
    mean_dk = float(spacings.mean())
    return OrbitFamilyStats(
        mean_dk=mean_dk,
        dk_star=dk_star,
        alpha=alpha(mean_dk, dk_star),
        sigma=float(spacings.std()),
    )
