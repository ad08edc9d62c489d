"""
this module evaluates the generalized Fourier transform of the generalized multiquadric
phi(x) = sqrt(c^(2d) + |x|^(2d)) in R^n.

The transform is the Mellin-Barnes integral

    phi_hat(s) = 2^(n-1) pi^((n-1)/2) c^d s^(-n)
                 * sum over poles t >= -1/2 of Res[ G(t) (cs/2)^(2dt) ],
    G(t) = Gamma(t) Gamma(-1/2 - t) Gamma(n/2 - d t) / Gamma(d t),

evaluated by summing residues. Poles come from Gamma(-1/2 - t) at t = k - 1/2
("half-integer") and from Gamma(n/2 - d t) at t = (n + 2m)/(2d) ("gamma-third"); where the
two coincide the pole is double and contributes a log(cs) term. An independent quadrature
oracle (regularized radial integral + Neville extrapolation) checks the series.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from mpmath import mp
from scipy import integrate, special

from .errors import NumericalFailure, ParameterError
from .utils import diagonal, neville_to_zero

logger = logging.getLogger(__name__)

HALF_INTEGER = "half-integer"
GAMMA_THIRD = "gamma-third"
CANCELLED = "cancelled"

CASE_D_ODD = "d_odd_or_noneven"
CASE_N_LT_D = "even_n_lt_d"
CASE_N_GT_D = "even_n_gt_d"
CASE_N_EQ_D = "even_n_eq_d"

# series evaluation
SERIES_CS_GUARD = 20.0
SERIES_CONDITION_LIMIT = 1e-6
SERIES_REFINE_LIMIT = 1e-14  # re-sum in extended precision above this estimate
SERIES_GUARD_DIGITS = 20
SERIES_MAX_DPS = 200
SERIES_TERM_RTOL = 1e-16
SERIES_SMALL_STREAK = 3
SERIES_T_CAP = 200

# quadrature oracle
ORACLE_DIMENSIONS = (1, 3)
ORACLE_EPS_BASE = 0.5
ORACLE_EPS_RATIO = 4.0
ORACLE_EPS_OFFSET = 3
ORACLE_EPS_POINTS = 6
ORACLE_CUTOFF = 40.0  # integrate while eps*r^2 <= 40
ORACLE_QUAD_LIMIT = 5000

_EPS = float(np.finfo(float).eps)


# ------------------------------------------------------------------------------
# Domain types
# ------------------------------------------------------------------------------


@dataclass(frozen=True)
class RbfParams:
    """Shape parameter c, generalization exponent d and ambient dimension n."""

    c: float
    d: int
    n: int

    def __post_init__(self):
        c, d, n = self.c, self.d, self.n
        if isinstance(d, float) and d.is_integer():
            object.__setattr__(self, "d", int(d))
        if isinstance(n, float) and n.is_integer():
            object.__setattr__(self, "n", int(n))
        if not isinstance(self.d, (int, np.integer)) or isinstance(self.d, bool):
            raise ParameterError(f"d must be a positive integer, got {d!r}")
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ParameterError(f"n must be a positive integer, got {n!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(c))
        if not math.isfinite(self.c) or self.c < 0:
            raise ParameterError(f"c must be finite and nonnegative, got {c!r}")
        if self.d < 1:
            raise ParameterError(f"d must be >= 1, got {d}")
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {n}")

    @property
    def d_even(self) -> bool:
        return self.d % 2 == 0

    @property
    def odd_odd(self) -> bool:
        return self.n % 2 == 1 and self.d % 2 == 1

    def require_odd_odd(self, operation: str) -> None:
        if not self.odd_odd:
            raise ParameterError(
                f"{operation} requires odd n and odd d, got n={self.n}, d={self.d}"
            )

    def to_dict(self) -> Dict[str, float]:
        return {"c": self.c, "d": self.d, "n": self.n}


@dataclass(frozen=True)
class Pole:
    """
    A pole of the Mellin-Barnes integrand at an exact rational location.

    k indexes the half-integer family (t = k - 1/2), m the gamma-third family
    (t = (n + 2m)/(2d)); a double pole has both.
    """

    location: Fraction
    order: int
    family: str
    k: Optional[int] = None
    m: Optional[int] = None


@dataclass(frozen=True)
class ExpansionTerm:
    """coefficient * s^exponent, times log(c s) when log_flag is set."""

    exponent: Fraction
    coefficient: float
    log_flag: bool = False

    def evaluate(self, c: float, s: float) -> float:
        value = self.coefficient * s ** float(self.exponent)
        if self.log_flag:
            value *= math.log(c * s)
        return value


@dataclass(frozen=True)
class LeadingTerm:
    """
    Leading behaviour of phi_hat as s -> 0+.

    For the logarithmic case the leading behaviour is coefficient*log(cs) + constant.
    printed_coefficient is the value of the closed-form asymptotic formula before sign
    normalization.
    """

    case_tag: str
    exponent: Fraction
    coefficient: float
    log_flag: bool
    constant: float = 0.0
    printed_coefficient: float = 0.0

    def evaluate(self, c: float, s: float) -> float:
        power = s ** float(self.exponent)
        if self.log_flag:
            return power * (self.coefficient * math.log(c * s) + self.constant)
        return self.coefficient * power


@dataclass
class SeriesEvaluation:
    value: float
    abs_sum: float
    n_terms: int
    last_term: float
    last_location: Fraction
    condition: float
    source: str = "series"
    working_dps: int = 0  # 0: double precision


@dataclass
class OracleEvaluation:
    value: float
    error_estimate: float
    eps_table: List[Tuple[float, float]] = field(default_factory=list)
    diagonal: List[float] = field(default_factory=list)


# ------------------------------------------------------------------------------
# Gamma family
# ------------------------------------------------------------------------------


def _is_gamma_pole(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_real(x: float, which: str = "gamma") -> float:
    """Gamma, log|Gamma| or digamma at a real argument (reflection handled by scipy)."""
    x = float(x)
    if which not in ("gamma", "log_abs_gamma", "digamma"):
        raise ParameterError(
            f"which must be 'gamma', 'log_abs_gamma' or 'digamma', got '{which}'"
        )
    if _is_gamma_pole(x):
        raise ParameterError(f"{which} has a pole at x = {x:g}")
    if which == "gamma":
        return float(special.gamma(x))
    if which == "log_abs_gamma":
        return float(special.gammaln(x))
    return float(special.digamma(x))


def _lg(x: Fraction) -> Tuple[float, float]:
    """(log|Gamma(x)|, sign Gamma(x)) for a non-pole rational x."""
    xf = float(x)
    return float(special.gammaln(xf)), float(special.gammasgn(xf))


# ------------------------------------------------------------------------------
# Poles
# ------------------------------------------------------------------------------


def _cancelled(params: RbfParams, t: Fraction) -> bool:
    dt = params.d * t
    return dt.denominator == 1 and dt <= 0


def enumerate_poles(
    params: RbfParams, t_max: float, include_cancelled: bool = False
) -> List[Pole]:
    """All poles with -1/2 <= location <= t_max, sorted ascending."""
    if not t_max > 0:
        raise ParameterError(f"t_max must be positive, got {t_max}")
    limit = Fraction(t_max).limit_denominator(10**9) if not isinstance(
        t_max, Fraction
    ) else t_max
    n, d = params.n, params.d

    hits: Dict[Fraction, Dict[str, int]] = {}
    k = 0
    while Fraction(2 * k - 1, 2) <= limit:
        hits.setdefault(Fraction(2 * k - 1, 2), {})["k"] = k
        k += 1
    m = 0
    while Fraction(n + 2 * m, 2 * d) <= limit:
        hits.setdefault(Fraction(n + 2 * m, 2 * d), {})["m"] = m
        m += 1

    poles = []
    for t in sorted(hits):
        idx = hits[t]
        if _cancelled(params, t):
            # zero of 1/Gamma(dt); only the half-integer t = -1/2 for even d lands here
            if include_cancelled:
                poles.append(Pole(t, 0, CANCELLED, idx.get("k"), idx.get("m")))
            continue
        if "k" in idx and "m" in idx:
            poles.append(Pole(t, 2, HALF_INTEGER, idx["k"], idx["m"]))
        elif "k" in idx:
            poles.append(Pole(t, 1, HALF_INTEGER, idx["k"], None))
        else:
            poles.append(Pole(t, 1, GAMMA_THIRD, None, idx["m"]))
    return poles


def _residue_parts(params: RbfParams, pole: Pole) -> Tuple[float, float, float]:
    """
    Residue of G(t) z^(2dt) at the pole, split as sign * exp(log_mag) * z^(2dt) * B(z).

    Returns (sign, log_mag, bracket) where B = 1 for simple poles and
    B = bracket + 2 log z for double poles.
    """
    n, d, t = params.n, params.d, pole.location
    lg_t, sg_t = _lg(t)
    lg_dt, sg_dt = _lg(d * t)

    if pole.order == 2:
        k, m = pole.k, pole.m
        sign = (-1.0) ** (k + m) * sg_t * sg_dt
        log_mag = lg_t - lg_dt - math.lgamma(k + 1) - math.lgamma(m + 1)
        bracket = (
            special.digamma(float(t)) / d
            - special.digamma(float(d * t))
            - special.digamma(m + 1.0)
            - special.digamma(k + 1.0) / d
        )
        return sign, log_mag, float(bracket)

    if pole.family == HALF_INTEGER:
        k = pole.k
        lg_third, sg_third = _lg(Fraction(n, 2) - d * t)
        sign = (-1.0) ** (k + 1) * sg_t * sg_third * sg_dt
        log_mag = lg_t + lg_third - lg_dt - math.lgamma(k + 1)
        return sign, log_mag, 1.0

    m = pole.m
    lg_half, sg_half = _lg(Fraction(-1, 2) - t)
    sign = (-1.0) ** (m + 1) * sg_t * sg_half * sg_dt
    log_mag = lg_t + lg_half - lg_dt - math.lgamma(m + 1) - math.log(d)
    return sign, log_mag, 1.0


def _log_prefactor(params: RbfParams) -> float:
    """log of 2^(n-1) pi^((n-1)/2), the c- and s-free part of the prefactor."""
    n = params.n
    return (n - 1) * math.log(2.0) + 0.5 * (n - 1) * math.log(math.pi)


def _c_power(c: float, p: Fraction) -> float:
    if c == 0.0:
        return 1.0 if p == 0 else 0.0
    return c ** float(p)


# ------------------------------------------------------------------------------
# Closed forms
# ------------------------------------------------------------------------------


def phi(params: RbfParams, r) -> np.ndarray:
    """phi(r) = sqrt(c^(2d) + r^(2d)), evaluated without overflow."""
    r = np.abs(np.asarray(r, dtype=float))
    return np.hypot(params.c**params.d, r**params.d)


def phi_hat_power(d: int, n: int, s: float) -> float:
    """Generalized transform of |x|^d in R^n at s > 0 (zero for even d)."""
    if s <= 0:
        raise ParameterError(f"s must be positive, got {s}")
    scale = (
        2.0 ** (n + d)
        * math.pi ** (n / 2)
        * special.gamma((n + d) / 2)
        * special.rgamma(-d / 2)
    )
    return float(scale * s ** (-n - d))


def bessel_reference(c: float, s: float, n: int = 1) -> float:
    """Classical multiquadric transform (d = 1) in one or three dimensions."""
    if s <= 0:
        raise ParameterError(f"s must be positive, got {s}")
    if n == 1:
        if c == 0.0:
            return -2.0 / s**2
        return float(-2.0 * c / s * special.kv(1, c * s))
    if n == 3:
        if c == 0.0:
            return -8.0 * math.pi / s**4
        return float(-4.0 * math.pi * c**2 / s**2 * special.kv(2, c * s))
    raise ParameterError(f"bessel_reference supports n in (1, 3), got n={n}")


def log_term_exponent(params: RbfParams) -> Fraction:
    """Exponent of the first s^e log(cs) term for odd n and odd d."""
    params.require_odd_odd("log_term_exponent")
    n, d = params.n, params.d
    j = math.ceil(Fraction(n - d, 2 * d))
    return Fraction(-n) + 2 * d * (j + Fraction(1, 2))


def reproduction_limit(params: RbfParams) -> int:
    """First limitation of polynomial reproduction imposed by the logarithmic term."""
    params.require_odd_odd("reproduction_limit")
    n, d = params.n, params.d
    return 2 * d * (math.ceil(Fraction(n - d, 2 * d)) + 1) - 1


def expansion_structure(params: RbfParams) -> Dict[str, object]:
    """
    Term counts of the small-s expansion up to the first logarithmic term: number of
    singular powers s^(-n+(2j-1)d), number of even powers s^(2j), and the log exponent.
    A negative upper limit for the even powers means the sum is empty.
    """
    params.require_odd_odd("expansion_structure")
    n, d = params.n, params.d
    singular = math.ceil(Fraction(n, 2 * d) - Fraction(1, 2)) + 1
    upper = d * math.ceil(Fraction(n - d, 2 * d)) + Fraction(d - n, 2)
    analytic = max(0, int(upper) + 1)
    return {
        "singular_terms": singular,
        "analytic_terms": analytic,
        "log_exponent": log_term_exponent(params),
    }


# ------------------------------------------------------------------------------
# Residue series
# ------------------------------------------------------------------------------


def _mpq(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _residue_mp(params: RbfParams, pole: Pole):
    """Signed residue factor and double-pole bracket at the current mpmath precision."""
    n, d, t = params.n, params.d, _mpq(pole.location)
    dt = d * t
    if pole.order == 2:
        k, m = pole.k, pole.m
        factor = (-1) ** (k + m) * mp.gamma(t) * mp.rgamma(dt) / (mp.factorial(k) * mp.factorial(m))
        bracket = mp.digamma(t) / d - mp.digamma(dt) - mp.digamma(m + 1) - mp.digamma(k + 1) / d
        return factor, bracket
    if pole.family == HALF_INTEGER:
        k = pole.k
        factor = (-1) ** (k + 1) * mp.gamma(t) * mp.gamma(mp.mpf(n) / 2 - dt) * mp.rgamma(dt)
        return factor / mp.factorial(k), None
    m = pole.m
    factor = (-1) ** (m + 1) * mp.gamma(t) * mp.gamma(-mp.mpf(1) / 2 - t) * mp.rgamma(dt)
    return factor / (mp.factorial(m) * d), None


def _series_sum_mp(params: RbfParams, s: float, poles: List[Pole], dps: int) -> float:
    with mp.workdps(dps):
        c, sm = mp.mpf(params.c), mp.mpf(s)
        z = c * sm / 2
        pref = (
            mp.power(2, params.n - 1)
            * mp.power(mp.pi, mp.mpf(params.n - 1) / 2)
            * mp.power(c, params.d)
            / mp.power(sm, params.n)
        )
        terms = []
        for pole in poles:
            factor, bracket = _residue_mp(params, pole)
            term = factor * mp.power(z, 2 * params.d * _mpq(pole.location))
            if bracket is not None:
                term *= bracket + 2 * mp.log(z)
            terms.append(term)
        return float(pref * mp.fsum(terms))


def _series_sum(params: RbfParams, s: float) -> SeriesEvaluation:
    c, d = params.c, params.d
    z = 0.5 * c * s
    log_z = math.log(z)
    log_pref = _log_prefactor(params) + d * math.log(c) - params.n * math.log(s)

    t_peak = z / d + 1.0
    t_cap = min(float(SERIES_T_CAP), max(8.0, 3.0 * z / d + 30.0))
    terms: List[float] = []
    used: List[Pole] = []
    partial = 0.0
    streak = 0
    last_term = 0.0
    last_t = Fraction(0)

    for pole in enumerate_poles(params, t_cap):
        sign, log_mag, bracket = _residue_parts(params, pole)
        t = pole.location
        weight = bracket + 2.0 * log_z if pole.order == 2 else 1.0
        term = sign * math.exp(log_mag + log_pref + 2.0 * d * float(t) * log_z) * weight
        terms.append(term)
        used.append(pole)
        partial += term
        last_term, last_t = term, t
        if float(t) > t_peak and abs(term) <= SERIES_TERM_RTOL * max(abs(partial), 1e-300):
            streak += 1
            if streak >= SERIES_SMALL_STREAK:
                break
        else:
            streak = 0
    else:
        raise NumericalFailure(
            f"residue series did not converge below t = {t_cap:g} (cs = {c * s:g})",
            details={"partial_sum": partial, "last_term": last_term, "t": str(last_t)},
        )

    value = math.fsum(terms)
    abs_sum = math.fsum(abs(x) for x in terms)
    condition = _EPS * abs_sum / abs(value) if value != 0.0 else math.inf
    dps = 0
    if SERIES_REFINE_LIMIT < condition < math.inf:
        # digits lost to cancellation, plus a guard
        lost = math.ceil(math.log10(abs_sum / abs(value)))
        if lost + SERIES_GUARD_DIGITS <= SERIES_MAX_DPS:
            dps = lost + SERIES_GUARD_DIGITS
            value = _series_sum_mp(params, s, used, dps)
            condition = 10.0 ** (-SERIES_GUARD_DIGITS) * abs_sum / max(abs(value), 1e-300) / 10.0**lost
            logger.debug(f"cs = {c * s:g}: re-summed {len(used)} residues at {dps} digits")
    return SeriesEvaluation(
        value=value,
        abs_sum=abs_sum,
        n_terms=len(terms),
        last_term=last_term,
        last_location=last_t,
        condition=condition,
        working_dps=dps,
    )


def phi_hat_series_detail(
    params: RbfParams, s: float, allow_fallback: bool = True
) -> SeriesEvaluation:
    """Residue-series evaluation with its cancellation diagnostics."""
    if not s > 0:
        raise ParameterError(f"s must be positive, got {s}")
    if params.c == 0.0:
        value = phi_hat_power(params.d, params.n, s)
        return SeriesEvaluation(value, abs(value), 1, value, Fraction(-1, 2), _EPS, "closed")

    cs = params.c * s
    reason = None
    if cs > SERIES_CS_GUARD:
        reason = f"cs = {cs:g} exceeds the series guard {SERIES_CS_GUARD:g}"
        result = None
    else:
        result = _series_sum(params, s)
        if result.condition > SERIES_CONDITION_LIMIT:
            reason = f"series cancellation estimate {result.condition:.2e} too large"

    if reason is None:
        return result
    if not allow_fallback or params.n not in ORACLE_DIMENSIONS:
        raise NumericalFailure(
            f"residue series unreliable: {reason}",
            details={
                "cs": cs,
                "partial_sum": None if result is None else result.value,
                "condition": None if result is None else result.condition,
            },
        )
    logger.warning(f"{reason}; falling back to the quadrature oracle")
    oracle = phi_hat_oracle_detail(params, s)
    return SeriesEvaluation(
        value=oracle.value,
        abs_sum=abs(oracle.value),
        n_terms=0,
        last_term=0.0,
        last_location=Fraction(0),
        condition=oracle.error_estimate / max(abs(oracle.value), 1e-300),
        source="oracle",
    )


def phi_hat_series(params: RbfParams, s: float) -> float:
    """phi_hat(s) by summing residues of the Mellin-Barnes integrand."""
    return phi_hat_series_detail(params, s).value


# ------------------------------------------------------------------------------
# Quadrature oracle
# ------------------------------------------------------------------------------


def _remainder(params: RbfParams):
    cd = params.c**params.d
    d = params.d

    def rho(r: float) -> float:
        rd = r**d
        return cd * cd / (math.hypot(cd, rd) + rd)

    return rho


def _regularized_integral(
    g, n: int, s: float, eps: float, tol: float
) -> Tuple[float, float]:
    upper = math.sqrt(ORACLE_CUTOFF / eps)
    kwargs = dict(
        wvar=s, epsabs=tol / 10, epsrel=tol / 10, limit=ORACLE_QUAD_LIMIT, maxp1=100
    )
    if n == 1:
        val, err = integrate.quad(
            lambda r: 2.0 * g(r) * math.exp(-eps * r * r), 0.0, upper, weight="cos", **kwargs
        )
        return val, err
    val, err = integrate.quad(
        lambda r: r * g(r) * math.exp(-eps * r * r), 0.0, upper, weight="sin", **kwargs
    )
    return 4.0 * math.pi / s * val, 4.0 * math.pi / s * err


def phi_hat_oracle_detail(
    params: RbfParams,
    s: float,
    tol: float = 1e-8,
    subtract_power: bool = True,
    n_eps: int = ORACLE_EPS_POINTS,
) -> OracleEvaluation:
    """
    Regularized radial Fourier integral with the factor exp(-eps r^2), extrapolated to
    eps = 0 with Neville's scheme on eps_k = s^2 * 0.5 * 4^-(k+3).

    With subtract_power the pure power |x|^d is removed first and its closed-form
    transform added back, so only the decaying remainder is integrated.
    """
    if params.n not in ORACLE_DIMENSIONS:
        raise ParameterError(f"the quadrature oracle supports n in (1, 3), got n={params.n}")
    if not s > 0:
        raise ParameterError(f"s must be positive, got {s}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")

    closed = phi_hat_power(params.d, params.n, s) if subtract_power else 0.0
    if subtract_power and params.c == 0.0:
        return OracleEvaluation(value=closed, error_estimate=0.0)

    if subtract_power:
        g = _remainder(params)
    else:
        cd, d = params.c**params.d, params.d

        def g(r: float) -> float:
            return math.hypot(cd, r**d)

    eps_list = [
        s * s * ORACLE_EPS_BASE * ORACLE_EPS_RATIO ** (-(k + ORACLE_EPS_OFFSET))
        for k in range(n_eps)
    ]
    values = []
    for eps in eps_list:
        val, _ = _regularized_integral(g, params.n, s, eps, tol)
        values.append(val)

    extrapolated, table = neville_to_zero(eps_list, values)
    diag = diagonal(table)
    error_estimate = abs(diag[-1] - diag[-2])
    value = closed + extrapolated
    eps_table = list(zip(eps_list, values))
    if error_estimate > tol * max(1.0, abs(value)):
        raise NumericalFailure(
            f"eps-extrapolation not contracting: estimate {error_estimate:.3e} > tol {tol:.1e}",
            details={"eps_table": eps_table, "diagonal": diag},
        )
    return OracleEvaluation(
        value=value, error_estimate=error_estimate, eps_table=eps_table, diagonal=diag
    )


def phi_hat_oracle(params: RbfParams, s: float, tol: float = 1e-8, **kwargs) -> float:
    return phi_hat_oracle_detail(params, s, tol=tol, **kwargs).value


# ------------------------------------------------------------------------------
# Small-s behaviour
# ------------------------------------------------------------------------------


def _pole_terms(params: RbfParams, pole: Pole) -> List[ExpansionTerm]:
    """The pole's contribution written as power (and power*log) terms in s."""
    sign, log_mag, bracket = _residue_parts(params, pole)
    d, t = params.d, pole.location
    exponent = Fraction(-params.n) + 2 * d * t
    c_factor = _c_power(params.c, d + 2 * d * t)
    base = sign * math.exp(log_mag + _log_prefactor(params) - 2 * d * float(t) * math.log(2.0))
    base *= c_factor
    if pole.order == 2:
        # (cs/2)^(2dt) [bracket + 2 log(cs) - 2 log 2]
        return [
            ExpansionTerm(exponent, base * (bracket - 2.0 * math.log(2.0)), False),
            ExpansionTerm(exponent, 2.0 * base, True),
        ]
    return [ExpansionTerm(exponent, base, False)]


def _printed_leading(params: RbfParams, case: str) -> float:
    n, d, c = params.n, params.d, params.c
    if case == CASE_D_ODD:
        return float(
            -(2.0 ** (n + d))
            * math.pi ** (n / 2)
            * special.gamma((d + n) / 2)
            * special.rgamma(-d / 2)
        )
    if case == CASE_N_LT_D:
        return float(
            -(math.pi ** ((n - 1) / 2))
            * c ** (n + d)
            / (2 * d)
            * special.gamma(-0.5 - n / (2 * d))
            * special.gamma(n / (2 * d))
            / special.gamma(n / 2)
        )
    if case == CASE_N_GT_D:
        return float(
            2.0 ** (n - 1 - d)
            * math.pi ** ((n - 1) / 2)
            * c ** (2 * d)
            * math.sqrt(math.pi)
            * special.gamma((n - d) / 2)
            / special.gamma(d / 2)
        )
    # n = d: coefficient of log(cs)
    return float(-(math.pi ** (n / 2)) * c ** (n + d) / special.gamma(n / 2))


def printed_leading_coefficient(params: RbfParams) -> float:
    """Leading coefficient as given by the closed-form asymptotic formulas."""
    return _printed_leading(params, _leading_case(params))


def _leading_case(params: RbfParams) -> str:
    if not params.d_even:
        return CASE_D_ODD
    if params.n < params.d:
        return CASE_N_LT_D
    if params.n > params.d:
        return CASE_N_GT_D
    return CASE_N_EQ_D


def asymptotic_leading(params: RbfParams) -> LeadingTerm:
    """Classify the s -> 0+ behaviour of phi_hat and evaluate the leading coefficient."""
    case = _leading_case(params)
    n, d = params.n, params.d
    if case == CASE_D_ODD:
        exponent = Fraction(-n - d)
        target = Fraction(-1, 2)
    elif case == CASE_N_LT_D:
        exponent = Fraction(0)
        target = Fraction(n, 2 * d)
    elif case == CASE_N_GT_D:
        exponent = Fraction(d - n)
        target = Fraction(1, 2)
    else:
        exponent = Fraction(0)
        target = Fraction(1, 2)

    pole = next(p for p in enumerate_poles(params, float(target) + 1.0) if p.location == target)
    terms = _pole_terms(params, pole)
    printed = _printed_leading(params, case)

    if case == CASE_N_EQ_D:
        series_coeff = next(t.coefficient for t in terms if t.log_flag)
        constant = next(t.coefficient for t in terms if not t.log_flag)
    else:
        series_coeff = terms[0].coefficient
        constant = 0.0

    if printed != 0.0 and series_coeff != 0.0:
        if math.copysign(1.0, printed) != math.copysign(1.0, series_coeff):
            logger.warning(
                f"closed-form leading coefficient for n={n}, d={d} has sign "
                f"{'+' if printed > 0 else '-'}, residue series gives "
                f"{'+' if series_coeff > 0 else '-'}; using the series sign"
            )
        if abs(abs(printed) - abs(series_coeff)) > 1e-10 * abs(series_coeff):
            logger.warning(
                f"closed-form leading magnitude {abs(printed):.16g} differs from the "
                f"residue value {abs(series_coeff):.16g}"
            )
    coefficient = math.copysign(abs(printed), series_coeff) if series_coeff else 0.0
    return LeadingTerm(
        case_tag=case,
        exponent=exponent,
        coefficient=coefficient,
        log_flag=case == CASE_N_EQ_D,
        constant=constant,
        printed_coefficient=printed,
    )


def expansion_at_zero(
    params: RbfParams, max_order: Optional[float] = None
) -> List[ExpansionTerm]:
    """
    Laurent-log expansion of phi_hat at s = 0 up to and including s^max_order.

    Defaults to stopping at the first logarithmic term for odd n (odd d); even n
    defaults to max_order = 2d.
    """
    if params.n % 2 == 1 and params.d_even:
        raise ParameterError(
            f"expansion_at_zero needs odd d for odd n (or even n), got n={params.n}, d={params.d}"
        )
    if max_order is None:
        top = log_term_exponent(params) if params.n % 2 == 1 else Fraction(2 * params.d)
    else:
        top = Fraction(max_order).limit_denominator(10**6)

    t_max = (top + params.n) / (2 * params.d)
    poles = enumerate_poles(params, max(t_max, Fraction(1, 10**6)))

    merged: Dict[Tuple[Fraction, bool], float] = {}
    for pole in poles:
        for term in _pole_terms(params, pole):
            if term.exponent > top:
                continue
            key = (term.exponent, term.log_flag)
            merged[key] = merged.get(key, 0.0) + term.coefficient
    return [
        ExpansionTerm(exponent=e, coefficient=coef, log_flag=flag)
        for (e, flag), coef in sorted(merged.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    ]


def evaluate_expansion(terms: List[ExpansionTerm], c: float, s: float) -> float:
    return math.fsum(term.evaluate(c, s) for term in terms)
