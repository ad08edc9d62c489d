"""
Unit tests for specfun module.
Tests the generalized Fourier transform, its poles and its small-s behaviour.
"""

import logging
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import special

from quasi_interp_pkg.errors import NumericalFailure, ParameterError
from quasi_interp_pkg.specfun import (
    CANCELLED,
    CASE_D_ODD,
    CASE_N_EQ_D,
    CASE_N_GT_D,
    CASE_N_LT_D,
    GAMMA_THIRD,
    HALF_INTEGER,
    ExpansionTerm,
    RbfParams,
    asymptotic_leading,
    bessel_reference,
    enumerate_poles,
    evaluate_expansion,
    expansion_at_zero,
    expansion_structure,
    gamma_real,
    log_term_exponent,
    phi,
    phi_hat_oracle,
    phi_hat_oracle_detail,
    phi_hat_power,
    phi_hat_series,
    phi_hat_series_detail,
    reproduction_limit,
)


@pytest.mark.unit
class TestRbfParams:
    """Test parameter validation"""

    def test_valid_params(self):
        """Test that valid parameters are stored as c float, d and n int"""
        p = RbfParams(1, 3, 1)
        assert p.c == 1.0 and isinstance(p.c, float)
        assert p.d == 3 and p.n == 1

    def test_integral_floats_accepted(self):
        """Test that 3.0 is accepted as d = 3"""
        p = RbfParams(0.5, 3.0, 1.0)
        assert p.d == 3 and isinstance(p.d, int)

    @pytest.mark.parametrize(
        "c,d,n",
        [(-1.0, 1, 1), (math.inf, 1, 1), (1.0, 0, 1), (1.0, 1.5, 1), (1.0, 1, 0), (1.0, True, 1)],
    )
    def test_invalid_params(self, c, d, n):
        """Test that inadmissible parameters raise ParameterError"""
        with pytest.raises(ParameterError):
            RbfParams(c, d, n)

    def test_odd_odd(self):
        """Test the odd-n odd-d regime flag"""
        assert RbfParams(1.0, 3, 1).odd_odd
        assert not RbfParams(1.0, 2, 1).odd_odd
        assert not RbfParams(1.0, 1, 2).odd_odd
        with pytest.raises(ParameterError, match="odd n and odd d"):
            RbfParams(1.0, 2, 1).require_odd_odd("test")


@pytest.mark.unit
class TestGammaReal:
    """Test the gamma family wrapper"""

    def test_values(self):
        """Test gamma, log|gamma| and digamma at known points"""
        assert gamma_real(5) == pytest.approx(24.0)
        assert gamma_real(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi))
        assert gamma_real(-0.5, "log_abs_gamma") == pytest.approx(math.log(2.0 * math.sqrt(math.pi)))
        assert gamma_real(1.0, "digamma") == pytest.approx(-np.euler_gamma)

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles_raise(self, x):
        """Test that nonpositive integers are reported as poles"""
        with pytest.raises(ParameterError, match="has a pole"):
            gamma_real(x)

    def test_unknown_function(self):
        """Test that an unknown selector is rejected"""
        with pytest.raises(ParameterError):
            gamma_real(1.0, "beta")


@pytest.mark.unit
class TestEnumeratePoles:
    """Test pole enumeration and classification"""

    def test_poles_d3(self, params_13):
        """Test the poles up to t = 1 for n = 1, d = 3"""
        poles = enumerate_poles(params_13, 1)
        assert [p.location for p in poles] == [
            Fraction(-1, 2),
            Fraction(1, 6),
            Fraction(1, 2),
            Fraction(5, 6),
        ]
        assert [p.order for p in poles] == [1, 1, 2, 1]
        assert poles[0].family == HALF_INTEGER
        assert poles[1].family == GAMMA_THIRD
        assert poles[2].k == 1 and poles[2].m == 1

    def test_sorted_and_bounded(self):
        """Test that locations are ascending and within [-1/2, t_max]"""
        poles = enumerate_poles(RbfParams(1.0, 5, 3), 4)
        locations = [p.location for p in poles]
        assert locations == sorted(locations)
        assert locations[0] == Fraction(-1, 2)
        assert locations[-1] <= 4

    def test_even_d_cancels_first_pole(self):
        """Test that t = -1/2 is cancelled by 1/Gamma(dt) for even d"""
        params = RbfParams(1.0, 2, 1)
        assert all(p.location != Fraction(-1, 2) for p in enumerate_poles(params, 2))
        with_cancelled = enumerate_poles(params, 2, include_cancelled=True)
        assert with_cancelled[0].location == Fraction(-1, 2)
        assert with_cancelled[0].family == CANCELLED
        assert with_cancelled[0].order == 0

    def test_invalid_bound(self, params_11):
        """Test that a nonpositive t_max is rejected"""
        with pytest.raises(ParameterError):
            enumerate_poles(params_11, 0)


@pytest.mark.unit
class TestClosedForms:
    """Test phi, the power transform and the Bessel references"""

    def test_phi(self):
        """Test phi at the origin and away from it"""
        assert phi(RbfParams(2.0, 1, 1), 0.0) == pytest.approx(2.0)
        assert phi(RbfParams(1.0, 1, 1), 3.0) == pytest.approx(math.sqrt(10.0))
        assert phi(RbfParams(1.0, 3, 1), -2.0) == pytest.approx(math.sqrt(65.0))

    def test_power_transform(self):
        """Test the transform of |x|^d against the c = 0 closed forms"""
        assert phi_hat_power(1, 1, 2.0) == pytest.approx(-0.5)
        assert phi_hat_power(1, 3, 1.0) == pytest.approx(-8.0 * math.pi)
        assert phi_hat_power(3, 1, 1.0) == pytest.approx(12.0)
        assert phi_hat_power(2, 1, 1.0) == 0.0

    def test_power_transform_rejects_nonpositive_s(self):
        """Test that s <= 0 is rejected"""
        with pytest.raises(ParameterError):
            phi_hat_power(1, 1, 0.0)

    def test_bessel_reference(self):
        """Test the classical multiquadric transforms"""
        assert bessel_reference(1.0, 1.0) == pytest.approx(-2.0 * special.kv(1, 1.0))
        assert bessel_reference(1.0, 1.0, 3) == pytest.approx(-4.0 * math.pi * special.kv(2, 1.0))
        assert bessel_reference(0.0, 2.0) == pytest.approx(-0.5)
        with pytest.raises(ParameterError):
            bessel_reference(1.0, 1.0, 2)


@pytest.mark.unit
@pytest.mark.numerical
class TestPhiHatSeries:
    """Test the residue series"""

    def test_classical_multiquadric_1d(self, params_11):
        """Test phi_hat(1) = -2 K_1(1) for c = d = n = 1"""
        value = phi_hat_series(params_11, 1.0)
        assert value == pytest.approx(-1.2038144603944692, rel=1e-12)

    @pytest.mark.parametrize("c,s", [(1.0, 0.1), (0.5, 3.0), (2.0, 1.5)])
    def test_bessel_identity_1d(self, c, s):
        """Test agreement with -2c/s K_1(cs) across cs"""
        value = phi_hat_series(RbfParams(c, 1, 1), s)
        assert value == pytest.approx(bessel_reference(c, s), rel=1e-10)

    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_bessel_identity_grid(self, c):
        """Test 1e-8 agreement with -2c/s K_1(cs) on 20 log-spaced cs in [0.1, 10]"""
        params = RbfParams(c, 1, 1)
        for cs in np.geomspace(0.1, 10.0, 20):
            s = cs / c
            detail = phi_hat_series_detail(params, s)
            assert detail.source == "series"
            assert detail.value == pytest.approx(bessel_reference(c, s), rel=1e-8), cs

    def test_cancellation_resummed(self, params_11):
        """Test that heavy cancellation at cs = 10 triggers extended-precision summation"""
        detail = phi_hat_series_detail(params_11, 10.0)
        assert detail.working_dps > 20
        assert detail.condition < 1e-10
        assert detail.value == pytest.approx(bessel_reference(1.0, 10.0), rel=1e-10)

    @pytest.mark.parametrize("c,d,n,s", [(2.0, 1, 1, 0.7), (0.5, 3, 1, 1.3), (2.0, 1, 3, 0.4)])
    def test_scaling_law(self, c, d, n, s):
        """Test phi_hat(s; c) = c^(n+d) phi_hat(cs; 1)"""
        scaled = c ** (n + d) * phi_hat_series(RbfParams(1.0, d, n), c * s)
        assert phi_hat_series(RbfParams(c, d, n), s) == pytest.approx(scaled, rel=1e-10)

    def test_bessel_identity_3d(self):
        """Test agreement with -4 pi c^2/s^2 K_2(cs) in three dimensions"""
        value = phi_hat_series(RbfParams(1.0, 1, 3), 1.5)
        assert value == pytest.approx(bessel_reference(1.0, 1.5, 3), rel=1e-10)

    def test_c_zero_uses_closed_form(self):
        """Test that c = 0 returns the transform of |x|^d"""
        detail = phi_hat_series_detail(RbfParams(0.0, 1, 1), 2.0)
        assert detail.source == "closed"
        assert detail.value == pytest.approx(-0.5)
        assert phi_hat_series(RbfParams(0.0, 1, 3), 1.0) == pytest.approx(-8.0 * math.pi)

    def test_diagnostics(self, params_13):
        """Test that the series reports its terms and a small condition estimate"""
        detail = phi_hat_series_detail(params_13, 1.0)
        assert detail.source == "series"
        assert detail.n_terms > 3
        assert detail.condition < 1e-10
        assert detail.abs_sum >= abs(detail.value)

    def test_large_cs_without_oracle_raises(self):
        """Test that large cs fails loudly when no oracle exists for the dimension"""
        with pytest.raises(NumericalFailure, match="series guard"):
            phi_hat_series_detail(RbfParams(1.0, 1, 5), 30.0)

    def test_large_cs_fallback_disabled(self, params_11):
        """Test that disabling the fallback raises instead of switching to the oracle"""
        with pytest.raises(NumericalFailure):
            phi_hat_series_detail(params_11, 30.0, allow_fallback=False)

    def test_nonpositive_s(self, params_11):
        """Test that s <= 0 is rejected"""
        with pytest.raises(ParameterError):
            phi_hat_series(params_11, -1.0)


@pytest.mark.unit
@pytest.mark.numerical
class TestPhiHatOracle:
    """Test the quadrature oracle"""

    def test_oracle_matches_bessel(self, params_11):
        """Test the oracle on the classical multiquadric"""
        value = phi_hat_oracle(params_11, 1.0)
        assert value == pytest.approx(bessel_reference(1.0, 1.0), rel=1e-6)

    def test_oracle_matches_series_d3(self, params_13):
        """Test oracle and series agree for d = 3"""
        oracle = phi_hat_oracle(params_13, 0.8)
        series = phi_hat_series(params_13, 0.8)
        assert oracle == pytest.approx(series, rel=1e-6)

    def test_oracle_table(self, params_11):
        """Test that the eps table and Neville diagonal are reported"""
        detail = phi_hat_oracle_detail(params_11, 1.0)
        assert len(detail.eps_table) == 6
        eps = [e for e, _ in detail.eps_table]
        assert eps == sorted(eps, reverse=True)
        assert len(detail.diagonal) == 6
        assert detail.error_estimate <= 1e-8 * max(1.0, abs(detail.value))

    def test_oracle_dimension(self):
        """Test that the oracle is limited to one and three dimensions"""
        with pytest.raises(ParameterError):
            phi_hat_oracle(RbfParams(1.0, 1, 2), 1.0)


@pytest.mark.unit
class TestExpansionStructure:
    """Test the closed-form counts of the small-s expansion"""

    @pytest.mark.parametrize("c,d,n,expected", [(1.0, 3, 1, 2), (1.0, 1, 1, 0), (1.0, 1, 3, 0)])
    def test_log_term_exponent(self, c, d, n, expected):
        """Test the exponent of the first logarithmic term"""
        assert log_term_exponent(RbfParams(c, d, n)) == expected

    @pytest.mark.parametrize("c,d,n,expected", [(1.0, 3, 1, 5), (1.0, 1, 1, 1), (1.0, 1, 3, 3)])
    def test_reproduction_limit(self, c, d, n, expected):
        """Test the reproduction limit imposed by the logarithmic term"""
        assert reproduction_limit(RbfParams(c, d, n)) == expected

    def test_expansion_structure_d3(self, params_13):
        """Test term counts for n = 1, d = 3"""
        structure = expansion_structure(params_13)
        assert structure["singular_terms"] == 1
        assert structure["analytic_terms"] == 2
        assert structure["log_exponent"] == 2

    def test_even_d_rejected(self):
        """Test that the structure needs odd n and odd d"""
        with pytest.raises(ParameterError):
            log_term_exponent(RbfParams(1.0, 2, 1))
        with pytest.raises(ParameterError):
            reproduction_limit(RbfParams(1.0, 1, 2))


@pytest.mark.unit
class TestAsymptoticLeading:
    """Test the classification of the s -> 0 behaviour"""

    def test_odd_d(self, params_11):
        """Test the s^(-n-d) case for the classical multiquadric"""
        lead = asymptotic_leading(params_11)
        assert lead.case_tag == CASE_D_ODD
        assert lead.exponent == -2
        assert lead.coefficient == pytest.approx(-2.0)
        assert not lead.log_flag

    def test_sign_follows_power_transform(self, params_13):
        """Test that the leading coefficient matches the transform of |x|^d"""
        lead = asymptotic_leading(params_13)
        assert lead.coefficient == pytest.approx(phi_hat_power(3, 1, 1.0))

    def test_sign_discrepancy_logged(self, params_11, caplog):
        """Test that a closed-form sign disagreeing with the residues is logged"""
        with caplog.at_level(logging.WARNING):
            lead = asymptotic_leading(params_11)
        assert lead.printed_coefficient == pytest.approx(2.0)
        assert "using the series sign" in caplog.text

    def test_even_d_cases(self):
        """Test the three even-d cases"""
        assert asymptotic_leading(RbfParams(1.0, 2, 1)).case_tag == CASE_N_LT_D
        gt = asymptotic_leading(RbfParams(1.0, 2, 3))
        assert gt.case_tag == CASE_N_GT_D
        assert gt.exponent == -1
        assert abs(gt.coefficient) == pytest.approx(math.pi**2)
        eq = asymptotic_leading(RbfParams(1.0, 2, 2))
        assert eq.case_tag == CASE_N_EQ_D
        assert eq.log_flag

    @pytest.mark.parametrize("d,n", [(1, 1), (3, 1), (1, 3), (5, 1), (3, 3)])
    def test_odd_d_all_dimensions(self, d, n):
        """Test that every odd d resolves the pole at t = -1/2"""
        params = RbfParams(1.0, d, n)
        lead = asymptotic_leading(params)
        assert lead.case_tag == CASE_D_ODD
        assert lead.exponent == -n - d
        assert lead.coefficient == pytest.approx(phi_hat_power(d, n, 1.0), rel=1e-12)

    @pytest.mark.parametrize("d,n", [(2, 1), (2, 3)])
    def test_even_d_power_ratio(self, d, n):
        """Test series / leading term -> 1 at small s for even d, n != d"""
        params = RbfParams(1.0, d, n)
        lead = asymptotic_leading(params)
        s = 1e-3
        assert phi_hat_series(params, s) / lead.evaluate(1.0, s) == pytest.approx(1.0, abs=0.02)

    def test_even_d_log_coefficient(self):
        """Test the log(cs) coefficient for n = d = 2 from two small s"""
        params = RbfParams(1.0, 2, 2)
        lead = asymptotic_leading(params)
        s_a, s_b = 1e-3, 2e-3
        slope = (phi_hat_series(params, s_b) - phi_hat_series(params, s_a)) / math.log(s_b / s_a)
        assert slope == pytest.approx(lead.coefficient, rel=0.02)

    def test_leading_matches_series(self, params_13):
        """Test that the leading term dominates at small s"""
        s = 1e-3
        lead = asymptotic_leading(params_13)
        assert lead.evaluate(1.0, s) == pytest.approx(phi_hat_series(params_13, s), rel=1e-3)


@pytest.mark.unit
@pytest.mark.numerical
class TestExpansionAtZero:
    """Test the Laurent-log expansion at s = 0"""

    def test_exponents_d1(self, params_11):
        """Test s^-2, s^0 and s^0 log(cs) for the classical multiquadric"""
        terms = expansion_at_zero(params_11)
        assert [(t.exponent, t.log_flag) for t in terms] == [
            (Fraction(-2), False),
            (Fraction(0), False),
            (Fraction(0), True),
        ]
        assert terms[0].coefficient == pytest.approx(-2.0)
        assert terms[1].coefficient == pytest.approx(0.6159315156584124, rel=1e-12)
        assert terms[2].coefficient == pytest.approx(-1.0)

    def test_exponents_d3(self, params_13):
        """Test that the expansion stops at the s^2 log(cs) term"""
        terms = expansion_at_zero(params_13)
        assert [(t.exponent, t.log_flag) for t in terms] == [
            (Fraction(-4), False),
            (Fraction(0), False),
            (Fraction(2), False),
            (Fraction(2), True),
        ]
        assert terms[0].coefficient == pytest.approx(12.0)

    def test_coefficients_scale_with_c(self):
        """Test that the log coefficient is -c^2 for d = 1"""
        terms = expansion_at_zero(RbfParams(2.0, 1, 1))
        log_term = next(t for t in terms if t.log_flag)
        assert log_term.coefficient == pytest.approx(-4.0)

    def test_matches_series(self, params_11):
        """Test the truncated expansion against the residue series at small s"""
        s = 1e-2
        approx = evaluate_expansion(expansion_at_zero(params_11), 1.0, s)
        assert approx == pytest.approx(phi_hat_series(params_11, s), rel=1e-6)

    def test_odd_n_even_d_rejected(self):
        """Test that odd n with even d has no expansion of this form"""
        with pytest.raises(ParameterError):
            expansion_at_zero(RbfParams(1.0, 2, 1))

    def test_term_evaluation(self):
        """Test a single power-log term"""
        term = ExpansionTerm(Fraction(2), 3.0, True)
        assert term.evaluate(1.0, math.e) == pytest.approx(3.0 * math.e**2)
