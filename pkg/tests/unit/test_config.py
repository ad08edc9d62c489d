"""
Unit tests for config module.
Tests the pydantic schema and its cross-field rules.
"""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from quasi_interp_pkg.config import (
    ExperimentConfig,
    IOConfig,
    LatticeConfig,
    ParamsConfig,
    StencilConfig,
    TopConfig,
)

BASE_TEMPLATE = Path(__file__).resolve().parents[2] / "configs" / "_base_template.yaml"


@pytest.mark.unit
class TestDefaults:
    """Test default values"""

    def test_top_defaults(self):
        """Test that an empty config is valid"""
        cfg = TopConfig()
        assert cfg.params.c == 1.0 and cfg.params.d == 1 and cfg.params.n == 1
        assert cfg.lattice.truncation_radius == 10_000
        assert cfg.experiment.h_list == [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]
        assert cfg.experiment.flat_at == [1]
        assert cfg.check is False

    def test_conversions(self):
        """Test conversion into library types"""
        params = ParamsConfig(c=0.5, d=3, n=1).to_params()
        assert (params.c, params.d, params.n) == (0.5, 3, 1)
        settings = LatticeConfig(truncation_radius=50, degree_hint=1).to_settings()
        assert settings.truncation_radius == 50 and settings.degree_hint == 1

    def test_unity_tolerance(self):
        """Test the partition-of-unity tolerance of the lattice section"""
        assert LatticeConfig().unity_tolerance == 1e-8
        assert LatticeConfig(unity_tolerance=1e-3).unity_tolerance == 1e-3
        with pytest.raises(ValidationError):
            LatticeConfig(unity_tolerance=0.0)

    def test_base_template_matches_schema(self):
        """Test that the base template spells out the schema defaults"""
        text = BASE_TEMPLATE.read_text()
        template = yaml.safe_load(text)
        defaults = TopConfig()
        for section, values in template.items():
            if not isinstance(values, dict):
                assert getattr(defaults, section) == values, section
                continue
            for key, value in values.items():
                assert getattr(getattr(defaults, section), key) == value, (section, key)
        assert "target_order: null   # default 2d - 1" in text


@pytest.mark.unit
class TestValidation:
    """Test field and cross-field validation"""

    def test_unknown_key_rejected(self):
        """Test extra='forbid'"""
        with pytest.raises(ValidationError):
            TopConfig(params={"c": 1.0, "shape": 2.0})

    @pytest.mark.parametrize("field,value", [("c", -1.0), ("d", 0), ("n", 0)])
    def test_params_bounds(self, field, value):
        """Test bounds on c, d and n"""
        with pytest.raises(ValidationError):
            ParamsConfig(**{field: value})

    def test_h_list_must_halve(self):
        """Test the geometric h_list rule"""
        with pytest.raises(ValidationError, match="halve"):
            ExperimentConfig(h_list=[1.0, 0.4, 0.2])

    def test_unknown_test_function(self):
        """Test that the test-function tag is checked"""
        with pytest.raises(ValidationError):
            ExperimentConfig(test_function="runge")

    def test_decade(self):
        """Test the decade rule"""
        assert ExperimentConfig(decade=[0.01, 0.1]).decade == [0.01, 0.1]
        with pytest.raises(ValidationError):
            ExperimentConfig(decade=[0.1, 0.01])

    def test_support_radius_positive(self):
        """Test that support_radius must be at least 1"""
        with pytest.raises(ValidationError):
            StencilConfig(support_radius=0)

    def test_io_names(self):
        """Test that output names are plain file names"""
        with pytest.raises(ValidationError):
            IOConfig(report_name="../report.json")

    def test_degree_hint_below_2d(self):
        """Test that degree_hint must be below 2d"""
        with pytest.raises(ValueError, match="degree_hint"):
            TopConfig(params={"d": 1}, lattice={"degree_hint": 2})
        TopConfig(params={"d": 3}, lattice={"degree_hint": 5})

    def test_degrees_below_2d(self):
        """Test that reproduction degrees must not exceed 2d - 1"""
        with pytest.raises(ValueError, match="degrees"):
            TopConfig(params={"d": 1}, experiment={"degrees": [0, 1, 2]})

    def test_flat_at_length(self):
        """Test that flat_at has 1 or n entries"""
        TopConfig(params={"n": 3}, experiment={"flat_at": [1, 0, 0]})
        with pytest.raises(ValueError, match="flat_at"):
            TopConfig(params={"n": 3}, experiment={"flat_at": [1, 0]})
