"""
Unit tests for utils module.
Tests extrapolation, slope fitting and point helpers.
"""

import numpy as np
import pytest

from quasi_interp_pkg.utils import (
    as_points,
    diagonal,
    loglog_slope,
    low_discrepancy_points,
    neville_to_zero,
    relative_error,
    successive_orders,
)


@pytest.mark.unit
class TestNeville:
    """Test extrapolation to zero"""

    def test_polynomial_exact(self):
        """Test that a quadratic is extrapolated exactly from three samples"""
        x = [0.4, 0.2, 0.1]
        y = [3.0 + 2.0 * t - 5.0 * t * t for t in x]
        value, table = neville_to_zero(x, y)
        assert value == pytest.approx(3.0, rel=1e-13)
        assert len(table) == 3

    def test_diagonal(self):
        """Test that the diagonal converges toward the limit"""
        x = [0.5 * 4.0**-k for k in range(5)]
        y = [np.exp(t) for t in x]
        _, table = neville_to_zero(x, y)
        diag = diagonal(table)
        assert len(diag) == 5
        assert abs(diag[-1] - 1.0) < abs(diag[0] - 1.0)
        assert diag[-1] == pytest.approx(1.0, abs=1e-8)

    def test_too_few_samples(self):
        """Test that one sample is rejected"""
        with pytest.raises(ValueError):
            neville_to_zero([0.1], [1.0])


@pytest.mark.unit
class TestSlopes:
    """Test log-log slope fitting and local orders"""

    def test_exact_power(self):
        """Test the slope of an exact power law"""
        r = np.geomspace(1.0, 100.0, 7)
        slope, intercept, stderr = loglog_slope(r, 5.0 * r**-3)
        assert slope == pytest.approx(-3.0)
        assert intercept == pytest.approx(np.log(5.0))
        assert stderr == pytest.approx(0.0, abs=1e-10)

    def test_two_points(self):
        """Test the two-sample slope"""
        slope, _, stderr = loglog_slope([1.0, 10.0], [1.0, 100.0])
        assert slope == pytest.approx(2.0)
        assert stderr == 0.0

    def test_absolute_values(self):
        """Test that signs are ignored"""
        slope, _, _ = loglog_slope([1.0, 2.0, 4.0], [-1.0, 0.25, -0.0625])
        assert slope == pytest.approx(-2.0)

    def test_successive_orders(self):
        """Test local orders of a second-order sequence"""
        h = [1.0, 0.5, 0.25]
        assert successive_orders(h, [1.0, 0.25, 0.0625]) == pytest.approx([2.0, 2.0])


@pytest.mark.unit
class TestPoints:
    """Test point generation and coercion"""

    def test_low_discrepancy_box(self):
        """Test scaling into a box"""
        pts = low_discrepancy_points(16, 2, seed=1, box=(-2.0, 2.0))
        assert pts.shape == (16, 2)
        assert np.all((pts >= -2.0) & (pts <= 2.0))

    def test_low_discrepancy_seeded(self):
        """Test reproducibility and seed dependence"""
        a = low_discrepancy_points(8, 1, seed=3)
        np.testing.assert_array_equal(a, low_discrepancy_points(8, 1, seed=3))
        assert not np.array_equal(a, low_discrepancy_points(8, 1, seed=4))

    def test_as_points(self):
        """Test scalar, single point and stack coercion"""
        assert as_points(0.5, 1).shape == (1, 1)
        assert as_points([0.1, 0.2, 0.3], 1).shape == (3, 1)
        assert as_points([0.1, 0.2, 0.3], 3).shape == (1, 3)
        assert as_points(np.zeros((4, 3)), 3).shape == (4, 3)
        with pytest.raises(ValueError):
            as_points(np.zeros((4, 2)), 3)

    def test_relative_error(self):
        """Test relative error with a zero reference"""
        assert relative_error(1.1, 1.0) == pytest.approx(0.1)
        assert relative_error(1e-3, 0.0) == pytest.approx(1e-3)
