"""
this module evaluates the quasi-Lagrange function Psi and the quasi-interpolant
Q_h f(x) = sum_j f(jh) Psi(x/h - j) with truncated lattice sums and an a-priori tail bound.

Psi is split into the polyharmonic part sum_k mu_k |x - k|^d and the remainder
sum_k mu_k (phi - |x - k|^d), the latter evaluated as c^(2d) / (phi + r^d) to avoid
cancellation. In one dimension the polyharmonic part vanishes identically outside the
support, since it is a polynomial of degree d whose coefficients are vanishing moments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .errors import InfeasibleError, ParameterError
from .symbol import Stencil
from .utils import as_points, loglog_slope, low_discrepancy_points

logger = logging.getLogger(__name__)

SAFETY_FACTOR = 4.0
SHELL_FACTOR = 8
MAX_RADIUS_3D = 60
CHUNK_ELEMENTS = 2_000_000  # pairwise differences held in memory at once
UNDERFLOW = 1e-300

Sampler = Callable[[np.ndarray], np.ndarray]


@dataclass
class LatticeSumSettings:
    """Truncation control for lattice sums (R is the lattice infinity-norm radius)."""

    truncation_radius: int = 10_000
    tail_tolerance: float = 1e-3
    degree_hint: int = 0
    growth_constant: float = 1.0

    def __post_init__(self):
        if self.truncation_radius < 1:
            raise ParameterError(
                f"truncation_radius must be a positive integer, got {self.truncation_radius}"
            )
        if not self.tail_tolerance > 0:
            raise ParameterError(f"tail_tolerance must be positive, got {self.tail_tolerance}")
        if self.degree_hint < 0:
            raise ParameterError(f"degree_hint must be >= 0, got {self.degree_hint}")


@dataclass
class DecayFit:
    direction: Tuple[float, ...]
    slope: float
    intercept: float
    stderr: float
    radii: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    truncated: bool = False


# ------------------------------------------------------------------------------
# Psi
# ------------------------------------------------------------------------------


def _psi_chunk(stencil: Stencil, pts: np.ndarray) -> np.ndarray:
    params = stencil.params
    c, d = params.c, params.d
    K, mu = stencil.points, stencil.weights
    r = np.linalg.norm(pts[:, None, :] - K[None, :, :], axis=2)
    rd = r**d
    cd = c**d
    remainder = (cd * cd / (np.hypot(cd, rd) + rd)) @ mu if c > 0 else np.zeros(len(pts))
    power = rd @ mu
    if params.n == 1:
        outside = np.abs(pts[:, 0]) > stencil.support_radius
        power = np.where(outside, 0.0, power)
    return power + remainder


def psi_eval(stencil: Stencil, x) -> np.ndarray:
    """Psi(x) = sum_k mu_k phi(x - k) at one point or a stack of points."""
    pts = as_points(x, stencil.params.n)
    step = max(1, CHUNK_ELEMENTS // (len(stencil.weights) * stencil.params.n))
    if len(pts) <= step:
        return _psi_chunk(stencil, pts)
    return np.concatenate(
        [_psi_chunk(stencil, pts[i : i + step]) for i in range(0, len(pts), step)]
    )


# ------------------------------------------------------------------------------
# Tail control
# ------------------------------------------------------------------------------


def _shell_points(n: int, radius: float) -> np.ndarray:
    if n == 1:
        return np.array([[radius], [-radius]])
    dirs = 2.0 * low_discrepancy_points(64, n, seed=0) - 1.0
    canonical = np.array([[1, 0, 0], [1, 1, 0], [1, 1, 1]], dtype=float)
    dirs = np.vstack([canonical, dirs])
    return radius * dirs / np.max(np.abs(dirs), axis=1, keepdims=True)


@lru_cache(maxsize=64)
def decay_constant(stencil: Stencil) -> float:
    """K = 4 * max |Psi(x)| |x|^(n+2d) on the shell |x|_inf = 8 (support + 1)."""
    n, d = stencil.params.n, stencil.params.d
    shell = _shell_points(n, SHELL_FACTOR * (stencil.support_radius + 1))
    norms = np.linalg.norm(shell, axis=1)
    scaled = np.abs(psi_eval(stencil, shell)) * norms ** (n + 2 * d)
    return SAFETY_FACTOR * float(np.max(scaled))


def _tail(base: float, d: int, deg: int, radius: float, offset: float) -> float:
    # |j| <= offset + |u| on the omitted shells |u| > R
    return base * math.fsum(
        math.comb(deg, i) * offset ** (deg - i) * radius ** (i - 2 * d) / (2 * d - i)
        for i in range(deg + 1)
    )


def tail_bound(stencil: Stencil, settings: LatticeSumSettings, offset: float = 0.0) -> float:
    """
    Bound on the lattice points omitted beyond R for samples growing like G |j|^deg:

        K * s_n * G * sum_i C(deg, i) t^(deg - i) R^(i - 2d) / (2d - i),

    with s_n = n 2^n the shell multiplicity and t = |x/h|_inf the offset of the evaluation
    point. At t = 0 this is K s_n G R^(deg - 2d) / (2d - deg).
    """
    n, d = stencil.params.n, stencil.params.d
    deg = settings.degree_hint
    if deg >= 2 * d:
        raise ParameterError(
            f"degree_hint {deg} >= 2d = {2 * d}: the lattice sum converges only for "
            f"polynomial growth up to degree 2d - 1 = {2 * d - 1}"
        )
    if offset < 0:
        raise ParameterError(f"offset must be nonnegative, got {offset}")
    base = decay_constant(stencil) * n * 2**n * settings.growth_constant
    return _tail(base, d, deg, settings.truncation_radius, offset)


def _suggestion(stencil: Stencil, settings: LatticeSumSettings, offset: float) -> Dict:
    """Smallest radius that meets the tolerance at the requested degree, and the largest
    degree that meets it at the requested radius (None if even degree 0 does not)."""
    n, d = stencil.params.n, stencil.params.d
    base = decay_constant(stencil) * n * 2**n * settings.growth_constant
    deg, R, tol = settings.degree_hint, settings.truncation_radius, settings.tail_tolerance

    hi = R
    while _tail(base, d, deg, hi, offset) > tol and hi < 2**60:
        hi *= 2
    lo = R
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _tail(base, d, deg, mid, offset) > tol:
            lo = mid
        else:
            hi = mid

    feasible = None
    for g in range(2 * d - 1, -1, -1):
        if _tail(base, d, g, R, offset) <= tol:
            feasible = g
            break
    return {"suggested_radius": int(hi), "max_feasible_degree": feasible}


# ------------------------------------------------------------------------------
# Quasi-interpolation
# ------------------------------------------------------------------------------


def _box(center: np.ndarray, radius: int) -> np.ndarray:
    axes = [
        np.arange(math.ceil(t - radius), math.floor(t + radius) + 1, dtype=float)
        for t in center
    ]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def _effective_settings(stencil: Stencil, settings: LatticeSumSettings) -> LatticeSumSettings:
    if stencil.params.n == 3 and settings.truncation_radius > MAX_RADIUS_3D:
        logger.warning(
            f"truncation radius {settings.truncation_radius} capped at {MAX_RADIUS_3D} "
            f"in three dimensions"
        )
        return LatticeSumSettings(
            truncation_radius=MAX_RADIUS_3D,
            tail_tolerance=settings.tail_tolerance,
            degree_hint=settings.degree_hint,
            growth_constant=settings.growth_constant,
        )
    return settings


def quasi_interp(
    stencil: Stencil,
    f: Sampler,
    h: float,
    x,
    settings: LatticeSumSettings,
    enforce_tail: bool = True,
) -> Tuple[float, float]:
    """
    Q_h f(x) over the lattice points with |j - x/h|_inf <= R.

    f maps an (M, n) array of sample locations to M values. Returns (value, tail_estimate);
    raises InfeasibleError when the tail estimate exceeds the tolerance, unless
    enforce_tail is off.
    """
    if not h > 0:
        raise ParameterError(f"h must be positive, got {h}")
    n = stencil.params.n
    t = as_points(x, n)[0] / h
    settings = _effective_settings(stencil, settings)

    offset = float(np.max(np.abs(t)))
    tail = tail_bound(stencil, settings, offset)
    if tail > settings.tail_tolerance and enforce_tail:
        hint = _suggestion(stencil, settings, offset)
        if hint["max_feasible_degree"] is None:
            alternative = "(no degree_hint meets the tolerance at this R)"
        else:
            alternative = f"or degree <= {hint['max_feasible_degree']}"
        raise InfeasibleError(
            f"tail bound {tail:.3e} exceeds tolerance {settings.tail_tolerance:.1e} at "
            f"R={settings.truncation_radius}, degree {settings.degree_hint}; "
            f"try R >= {hint['suggested_radius']} {alternative}",
            details={"tail_bound": tail, **hint},
        )

    J = _box(t, settings.truncation_radius)
    offsets = t[None, :] - J
    dist = np.linalg.norm(offsets, axis=1)
    order = np.lexsort(tuple(J.T[::-1]) + (dist,))
    J, offsets = J[order], offsets[order]

    samples = np.asarray(f(J * h), dtype=float).reshape(-1)
    psi = psi_eval(stencil, offsets)
    value = math.fsum(samples * psi)
    return value, tail


def partition_of_unity(
    stencil: Stencil, points, settings: LatticeSumSettings
) -> Tuple[float, List[float]]:
    """
    sup over points of |sum_j Psi(x - j) - 1|, with the per-point residuals.

    The residual is itself the truncation error of the lattice sum, so the a-priori tail
    bound is not enforced here; it is logged when it exceeds the tolerance.
    """
    pts = as_points(points, stencil.params.n)
    unit = LatticeSumSettings(
        truncation_radius=settings.truncation_radius,
        tail_tolerance=settings.tail_tolerance,
        degree_hint=0,
        growth_constant=1.0,
    )

    def one(z: np.ndarray) -> np.ndarray:
        return np.ones(len(z))

    bound = tail_bound(stencil, _effective_settings(stencil, unit))
    if bound > unit.tail_tolerance:
        logger.info(
            f"tail bound {bound:.3e} above tolerance {unit.tail_tolerance:.1e}; "
            f"reporting the measured residuals"
        )
    residuals = [
        abs(quasi_interp(stencil, one, 1.0, p, unit, enforce_tail=False)[0] - 1.0) for p in pts
    ]
    return max(residuals), residuals


# ------------------------------------------------------------------------------
# Decay
# ------------------------------------------------------------------------------


def psi_decay_fit(stencil: Stencil, direction, radii: Sequence[float]) -> DecayFit:
    """Least-squares slope of log|Psi(r u)| against log r along the unit direction u."""
    n = stencil.params.n
    u = np.asarray(direction, dtype=float).reshape(n)
    u = u / np.linalg.norm(u)
    r = np.sort(np.asarray(radii, dtype=float))
    if r[0] < stencil.support_radius + 5:
        raise ParameterError(
            f"decay radii must start beyond support_radius + 5 = {stencil.support_radius + 5}"
        )
    if math.log10(r[-1] / r[0]) < 1.5:
        raise ParameterError("decay radii must span at least 1.5 decades")

    values = np.abs(psi_eval(stencil, r[:, None] * u[None, :]))
    tiny = values < UNDERFLOW
    truncated = bool(np.any(tiny))
    if truncated:
        cut = int(np.argmax(tiny))
        logger.warning(
            f"|Psi| underflows beyond r = {r[cut]:g}; truncating the radius list "
            f"to {cut} point(s)"
        )
        r, values = r[:cut], values[:cut]
    if len(r) < 2:
        return DecayFit(tuple(u), -math.inf, math.nan, math.nan, r.tolist(), values.tolist(), truncated)

    slope, intercept, stderr = loglog_slope(r, values)
    return DecayFit(tuple(u), slope, intercept, stderr, r.tolist(), values.tolist(), truncated)
