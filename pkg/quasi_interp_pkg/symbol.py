"""
this module constructs the finite coefficient set mu_k of the quasi-Lagrange function
Psi(x) = sum_k mu_k phi(x - k) and evaluates its symbol p(y) = sum_k mu_k exp(-i k.y).

Coefficients are stored per orbit of the hyperoctahedral group (coordinate permutations and
sign flips). The construction imposes the moment conditions sum_k mu_k k^alpha = 0 for
|alpha| < n + d, and asks the homogeneous Taylor components of p of order n + d + 2r to be
multiples of |y|^(n+d+2r) chosen so that p(y) * phi_hat(|y|) = 1 + O(|y|^(target_order+1)).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from .errors import InfeasibleError, NumericalFailure, ParameterError
from .specfun import RbfParams, expansion_at_zero, phi_hat_series
from .utils import as_points, loglog_slope

logger = logging.getLogger(__name__)

RADIUS_CAP_1D = 40
RADIUS_CAP_3D = 5
SOLVE_RESIDUAL_TOL = 1e-10
RANK_RTOL = 1e-12
IMAG_TOL = 1e-13
TAYLOR_SWITCH = 2.0  # |y| * max|k| below which the symbol uses its Taylor form
TAYLOR_EXTRA_TERMS = 40

Orbit = Tuple[Tuple[int, ...], float]


# ------------------------------------------------------------------------------
# Orbits
# ------------------------------------------------------------------------------


def canonical(k: Sequence[int]) -> Tuple[int, ...]:
    """Orbit representative: sorted absolute values."""
    return tuple(sorted(abs(int(v)) for v in k))


def orbit_points(representative: Sequence[int]) -> List[Tuple[int, ...]]:
    """All lattice points reachable from the representative by permutations and sign flips."""
    pts = set()
    for perm in itertools.permutations(representative):
        for signs in itertools.product((1, -1), repeat=len(perm)):
            pts.add(tuple(s * v for s, v in zip(signs, perm)))
    return sorted(pts)


def _representatives(n: int, radius: int) -> List[Tuple[int, ...]]:
    return list(itertools.combinations_with_replacement(range(radius + 1), n))


def _even_multi_indices(n: int, degree: int) -> List[Tuple[int, ...]]:
    """Canonical (sorted) multi-indices of the given even total degree with all entries even."""
    half = degree // 2
    return [
        tuple(2 * g for g in gamma)
        for gamma in itertools.combinations_with_replacement(range(half + 1), n)
        if sum(gamma) == half
    ]


def _multinomial_inverse(alpha: Sequence[int]) -> float:
    """1 / alpha!"""
    return math.exp(-sum(math.lgamma(a + 1) for a in alpha))


# ------------------------------------------------------------------------------
# Domain types
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Stencil:
    """Symmetric coefficient set, stored as (representative, weight) per orbit."""

    params: RbfParams
    orbits: Tuple[Orbit, ...]

    @classmethod
    def from_entries(cls, params: RbfParams, entries: Dict, atol: float = 1e-14) -> "Stencil":
        """Build from a full map k -> mu_k; the map must already be symmetric."""
        grouped: Dict[Tuple[int, ...], float] = {}
        for key, weight in entries.items():
            k = (key,) if isinstance(key, (int, np.integer)) else tuple(key)
            if len(k) != params.n:
                raise ParameterError(f"lattice point {k} does not have {params.n} coordinates")
            rep = canonical(k)
            if rep in grouped and abs(grouped[rep] - weight) > atol:
                raise ParameterError(
                    f"stencil is not symmetric: orbit {rep} has weights {grouped[rep]} and {weight}"
                )
            grouped.setdefault(rep, float(weight))
        for rep, weight in grouped.items():
            for k in orbit_points(rep):
                key = k[0] if params.n == 1 else k
                other = entries.get(key, entries.get(k))
                if other is None or abs(other - weight) > atol:
                    raise ParameterError(f"stencil is not symmetric at orbit {rep}")
        return cls(params, tuple(sorted(grouped.items())))

    @property
    def support_radius(self) -> int:
        return max((max(rep) for rep, w in self.orbits if w != 0.0), default=0)

    @cached_property
    def _expanded(self) -> Tuple[np.ndarray, np.ndarray]:
        pts, weights = [], []
        for rep, w in self.orbits:
            for k in orbit_points(rep):
                pts.append(k)
                weights.append(w)
        return np.asarray(pts, dtype=float).reshape(-1, self.params.n), np.asarray(weights)

    @property
    def points(self) -> np.ndarray:
        return self._expanded[0]

    @property
    def weights(self) -> np.ndarray:
        return self._expanded[1]

    def entries(self) -> Dict[Tuple[int, ...], float]:
        return {
            tuple(int(v) for v in k): float(w) for k, w in zip(self.points, self.weights)
        }

    def weight(self, k: Sequence[int]) -> float:
        rep = canonical(k)
        return next((w for r, w in self.orbits if r == rep), 0.0)

    def to_dict(self) -> Dict:
        return {
            "params": self.params.to_dict(),
            "orbits": [
                {"representative": list(rep), "weight": w} for rep, w in self.orbits
            ],
        }

    @classmethod
    def from_dict(cls, payload: Dict) -> "Stencil":
        params = RbfParams(**payload["params"])
        orbits = tuple(
            (tuple(int(v) for v in o["representative"]), float(o["weight"]))
            for o in payload["orbits"]
        )
        return cls(params, orbits)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @cached_property
    def digest(self) -> str:
        canonical_json = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical_json.encode("utf-8")).hexdigest()


@dataclass
class FlatnessReport:
    location: Tuple[int, ...]
    fitted_order: float
    log_corrected_order: float
    decade: Tuple[float, float]
    residual_curve: List[Tuple[float, float]] = field(default_factory=list)
    per_direction: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "location": list(self.location),
            "fitted_order": self.fitted_order,
            "log_corrected_order": self.log_corrected_order,
            "decade": list(self.decade),
            "per_direction": self.per_direction,
            "residual_curve": [list(p) for p in self.residual_curve],
        }


# ------------------------------------------------------------------------------
# Construction
# ------------------------------------------------------------------------------


def _check_regime(params: RbfParams) -> None:
    params.require_odd_odd("stencil construction")
    if params.n not in (1, 3):
        raise ParameterError(f"stencils are built for n in (1, 3), got n={params.n}")
    if params.n == 3 and params.d not in (1, 3):
        raise ParameterError(f"three-dimensional stencils need d in (1, 3), got d={params.d}")


def flatness_targets(params: RbfParams, target_order: int) -> List[float]:
    """
    Radial Taylor coefficients beta_r (r = 0..(target_order-1)/2) that p must have so that
    p(y) * phi_hat(|y|) = 1 + O(|y|^(target_order+1)), p ~ sum_r beta_r |y|^(n+d+2r).
    """
    if target_order < 1:
        raise ParameterError(f"target_order must be >= 1, got {target_order}")
    n, d = params.n, params.d
    top = Fraction(target_order - n - d)
    terms = expansion_at_zero(params, max_order=max(top, Fraction(-n - d)))

    logs = [t for t in terms if t.log_flag and n + d + t.exponent <= target_order]
    if logs:
        raise InfeasibleError(
            f"logarithmic term s^{logs[0].exponent} log(cs) limits the attainable flatness "
            f"below order {target_order} for n={n}, d={d}",
            details={"log_exponent": str(logs[0].exponent)},
        )
    coef = {t.exponent: t.coefficient for t in terms if not t.log_flag}
    c0 = coef.get(Fraction(-n - d), 0.0)
    if c0 == 0.0:
        raise InfeasibleError(f"phi_hat has no s^{-n - d} singularity for n={n}, d={d}")

    beta: List[float] = []
    for q in range((target_order - 1) // 2 + 1):
        acc = 1.0 if q == 0 else 0.0
        for r, b in enumerate(beta):
            acc -= b * coef.get(Fraction(2 * q - n - d - 2 * r), 0.0)
        beta.append(acc / c0)
    return beta


def _constraint_system(
    params: RbfParams, radius: int, beta: Sequence[float]
) -> Tuple[np.ndarray, np.ndarray, List[Tuple[int, ...]]]:
    n, d = params.n, params.d
    reps = _representatives(n, radius)
    orbit_pts = [np.asarray(orbit_points(rep), dtype=float) for rep in reps]

    def moment_row(alpha: Tuple[int, ...]) -> np.ndarray:
        a = np.asarray(alpha, dtype=float)
        return np.array([np.prod(pts**a, axis=1).sum() for pts in orbit_pts])

    rows, rhs = [], []
    for degree in range(0, n + d, 2):
        for alpha in _even_multi_indices(n, degree):
            rows.append(moment_row(alpha))
            rhs.append(0.0)
    for r, b in enumerate(beta):
        two_j = n + d + 2 * r
        j = two_j // 2
        lam = (-1) ** j * math.factorial(two_j) * b
        for alpha in _even_multi_indices(n, two_j):
            scale = math.factorial(two_j) * _multinomial_inverse(alpha)
            target = lam * math.factorial(j) * _multinomial_inverse([a // 2 for a in alpha])
            rows.append(scale * moment_row(alpha))
            rhs.append(target)

    A = np.vstack(rows)
    b = np.asarray(rhs)
    norms = np.max(np.abs(A), axis=1)
    norms[norms == 0.0] = 1.0
    return A / norms[:, None], b / norms, reps


def _min_norm_solve(A: np.ndarray, b: np.ndarray) -> Tuple[Optional[np.ndarray], float]:
    """Minimum-norm solution of A w = b via pivoted QR of A^T; None if inconsistent."""
    Q, R, piv = linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return None, math.inf
    rank = int(np.sum(diag > RANK_RTOL * diag[0]))
    z = linalg.solve_triangular(R[:rank, :rank], b[piv[:rank]], trans="T")
    w = Q[:, :rank] @ z
    residual = float(np.max(np.abs(A @ w - b))) if len(b) else 0.0
    if residual > SOLVE_RESIDUAL_TOL:
        return None, residual
    return w, residual


def _solve_at(params: RbfParams, radius: int, beta: Sequence[float]) -> Optional[Stencil]:
    A, b, reps = _constraint_system(params, radius, beta)
    w, residual = _min_norm_solve(A, b)
    if w is None:
        logger.debug(f"support radius {radius} infeasible (residual {residual:.2e})")
        return None
    return Stencil(params, tuple((rep, float(x)) for rep, x in zip(reps, w)))


def build_stencil(
    params: RbfParams,
    support_radius: Optional[int] = None,
    target_order: Optional[int] = None,
    minimal_support: bool = True,
) -> Stencil:
    """
    Construct the symmetric stencil from moment and flatness conditions.

    With minimal_support the smallest feasible radius not exceeding support_radius is used
    (support_radius None means up to the dimension's cap); otherwise exactly support_radius.
    The minimum-norm orbit-weight solution is returned.
    """
    _check_regime(params)
    cap = RADIUS_CAP_1D if params.n == 1 else RADIUS_CAP_3D
    if support_radius is not None:
        if support_radius < 1:
            raise ParameterError(f"support_radius must be >= 1, got {support_radius}")
        if params.n == 3 and support_radius > RADIUS_CAP_3D:
            raise ParameterError(
                f"three-dimensional stencils are limited to support_radius <= {RADIUS_CAP_3D}"
            )
    target = 2 * params.d - 1 if target_order is None else int(target_order)
    beta = flatness_targets(params, target)

    limit = cap if support_radius is None else support_radius
    radii = range(1, limit + 1) if minimal_support else [limit]
    for radius in radii:
        stencil = _solve_at(params, radius, beta)
        if stencil is not None:
            logger.info(
                f"stencil for n={params.n}, d={params.d}, c={params.c:g}: "
                f"support radius {radius}, {len(stencil.orbits)} orbits"
            )
            return stencil

    minimal = None
    for radius in range(1, cap + 1):
        if radius <= limit and minimal_support:
            continue
        if _solve_at(params, radius, beta) is not None:
            minimal = radius
            break
    found = f"minimal support radius {minimal}" if minimal else f"none <= {cap}"
    raise InfeasibleError(
        f"infeasible; support radius {limit} cannot satisfy the moment and flatness "
        f"conditions of order {target} ({found})",
        minimal_support_radius=minimal,
        details={"support_radius": limit, "target_order": target, "radius_cap": cap},
    )


def _series_divide(num: np.ndarray, den: np.ndarray, terms: int) -> np.ndarray:
    out = np.zeros(terms)
    for i in range(terms):
        acc = num[i] if i < len(num) else 0.0
        for j in range(1, min(i, len(den) - 1) + 1):
            acc -= den[j] * out[i - j]
        out[i] = acc / den[0]
    return out


def build_stencil_1d_closed(params: RbfParams) -> Stencil:
    """
    One-dimensional stencil from the ansatz p(y) = (2 sin(y/2))^(1+d) sum_m a_m cos(m y),
    m = 0..d-1, with p * phi_hat = 1 + O(y^(2d)).
    """
    if params.n != 1 or params.d % 2 == 0:
        raise ParameterError(
            f"the closed construction needs n = 1 and odd d, got n={params.n}, d={params.d}"
        )
    d = params.d
    beta = np.asarray(flatness_targets(params, 2 * d - 1))

    # (2 sin(y/2))^(1+d) = y^(1+d) * sigma(y^2)
    u = np.array([(-1) ** i / (4**i * math.factorial(2 * i + 1)) for i in range(d)])
    sigma = np.polynomial.polynomial.polypow(u, d + 1)[:d]
    gamma = _series_divide(beta, sigma, d)

    # sum_m a_m m^(2i) = (-1)^i (2i)! gamma_i
    m = np.arange(d, dtype=float)
    V = np.vstack([m ** (2 * i) if i else np.ones(d) for i in range(d)])
    rhs = np.array([(-1) ** i * math.factorial(2 * i) * gamma[i] for i in range(d)])
    a = linalg.solve(V, rhs)

    half = (1 + d) // 2
    base = np.array(
        [(-1) ** abs(j) * special.comb(2 * half, half - abs(j), exact=True) for j in range(-half, half + 1)],
        dtype=float,
    )
    cosines = np.zeros(2 * d - 1)
    cosines[d - 1] = a[0]
    for mm in range(1, d):
        cosines[d - 1 + mm] += a[mm] / 2
        cosines[d - 1 - mm] += a[mm] / 2
    mu = np.convolve(base, cosines)
    offset = (len(mu) - 1) // 2
    orbits = tuple(((k,), float(mu[offset + k])) for k in range(offset + 1))
    return Stencil(params, orbits)


# ------------------------------------------------------------------------------
# Evaluation
# ------------------------------------------------------------------------------


def _reduce(y: np.ndarray) -> np.ndarray:
    return y - 2 * np.pi * np.round(y / (2 * np.pi))


def symbol_eval(stencil: Stencil, y) -> np.ndarray:
    """
    p(y) = sum_k mu_k cos(k.y) at one point or a stack of points.

    Near lattice points 2*pi*j the sum is evaluated from its Taylor series, starting at the
    order n + d where the moment conditions stop.
    """
    params = stencil.params
    pts = _reduce(as_points(y, params.n))
    K, mu = stencil.points, stencil.weights
    kmax = float(np.max(np.abs(K))) if K.size else 0.0
    dots = pts @ K.T

    out = np.empty(len(pts))
    near = np.linalg.norm(pts, axis=1) * max(kmax, 1.0) <= TAYLOR_SWITCH
    if np.any(~near):
        far = dots[~near]
        out[~near] = np.cos(far) @ mu
        imag = np.abs(np.sin(far) @ mu)
        bound = IMAG_TOL * max(1.0, float(np.sum(np.abs(mu))))
        if np.any(imag > bound):
            raise NumericalFailure(
                f"symbol has imaginary part {imag.max():.2e}; stencil is not symmetric"
            )
    if np.any(near):
        sub = dots[near]
        start = (params.n + params.d + 1) // 2
        sq = sub * sub
        power = sq**start
        acc = np.zeros(len(sub))
        for j in range(start, start + TAYLOR_EXTRA_TERMS):
            term = (-1) ** j / math.factorial(2 * j) * (power @ mu)
            acc += term
            if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(acc), 1e-300)):
                break
            power = power * sq
        out[near] = acc
    return out


def psi_hat_eval(stencil: Stencil, y) -> np.ndarray:
    """Psi_hat(y) = p(y) * phi_hat(|y|) for y != 0."""
    pts = as_points(y, stencil.params.n)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(norms == 0.0):
        raise ParameterError("psi_hat_eval is singular at y = 0; use flatness_order")
    p = symbol_eval(stencil, pts)
    transform = np.array([phi_hat_series(stencil.params, float(s)) for s in norms])
    return p * transform


def flatness_directions(n: int) -> Dict[str, np.ndarray]:
    if n == 1:
        return {"+1": np.array([1.0]), "-1": np.array([-1.0])}
    return {
        "axis": np.array([1.0, 0.0, 0.0]),
        "face_diagonal": np.array([1.0, 1.0, 0.0]) / math.sqrt(2),
        "body_diagonal": np.ones(3) / math.sqrt(3),
    }


def flatness_order(
    stencil: Stencil,
    at=0,
    decade: Tuple[float, float] = (1e-3, 1e-2),
    n_samples: int = 10,
) -> FlatnessReport:
    """Sample |Psi_hat - delta_j0| along fixed directions around 2*pi*j and fit the order."""
    n = stencil.params.n
    j = np.zeros(n) + np.asarray(at, dtype=float)
    if j.shape != (n,):
        raise ParameterError(f"location must have {n} coordinates")
    r_min, r_max = decade
    if not 0 < r_min < r_max < math.pi:
        raise ParameterError(f"decade must satisfy 0 < r_min < r_max < pi, got {decade}")
    delta = 1.0 if not np.any(j) else 0.0
    radii = np.geomspace(r_min, r_max, n_samples)

    per_direction: Dict[str, float] = {}
    curve: List[Tuple[float, float]] = []
    for name, u in flatness_directions(n).items():
        y = 2 * np.pi * j[None, :] + radii[:, None] * u[None, :]
        residual = np.abs(psi_hat_eval(stencil, y) - delta)
        per_direction[name] = loglog_slope(radii, residual)[0]
        curve.extend(zip(radii.tolist(), residual.tolist()))

    r_all = np.array([p[0] for p in curve])
    v_all = np.array([p[1] for p in curve])
    fitted = loglog_slope(r_all, v_all)[0]
    corrected = loglog_slope(r_all, v_all / np.abs(np.log(r_all)))[0]
    return FlatnessReport(
        location=tuple(int(v) for v in j),
        fitted_order=fitted,
        log_corrected_order=corrected,
        decade=(r_min, r_max),
        residual_curve=curve,
        per_direction=per_direction,
    )


def moment_residuals(stencil: Stencil) -> Dict[Tuple[int, ...], float]:
    """|sum_k mu_k k^alpha| for every multi-index with |alpha| < n + d."""
    n, d = stencil.params.n, stencil.params.d
    K, mu = stencil.points, stencil.weights
    out = {}
    for degree in range(n + d):
        for alpha in itertools.product(range(degree + 1), repeat=n):
            if sum(alpha) != degree:
                continue
            terms = mu * np.prod(K ** np.asarray(alpha, dtype=float), axis=1)
            out[alpha] = abs(math.fsum(terms))
    return out
