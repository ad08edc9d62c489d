"""
this module defines the configuration schema for quasi-interpolation experiments.
"""

from __future__ import annotations

import math
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .harness import test_function
from .lagrange import LatticeSumSettings
from .specfun import RbfParams

# ------------------------------------------------------------------------------
# Sub-schemas (top level scheme below)
# ------------------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsConfig(_Strict):
    """Kernel parameters: phi(x) = sqrt(c^(2d) + |x|^(2d)) in R^n"""

    c: float = Field(1.0, ge=0.0)
    d: int = Field(1, ge=1)
    n: int = Field(1, ge=1)

    def to_params(self) -> RbfParams:
        return RbfParams(self.c, self.d, self.n)


class FourierConfig(_Strict):
    s: float = Field(1.0, gt=0.0)
    tol: float = Field(1e-8, gt=0.0)
    s_small: float = Field(1e-3, gt=0.0)  # evaluation point for the small-s expansion
    oracle_check: bool = True


class StencilConfig(_Strict):
    support_radius: Optional[int] = Field(None, ge=1)
    target_order: Optional[int] = Field(None, ge=1)
    minimal_support: bool = True


class LatticeConfig(_Strict):
    truncation_radius: int = Field(10_000, ge=1)
    tail_tolerance: float = Field(1e-3, gt=0.0)
    degree_hint: int = Field(0, ge=0)
    growth_constant: float = Field(1.0, gt=0.0)
    unity_tolerance: float = Field(1e-8, gt=0.0)

    def to_settings(self) -> LatticeSumSettings:
        return LatticeSumSettings(
            truncation_radius=self.truncation_radius,
            tail_tolerance=self.tail_tolerance,
            degree_hint=self.degree_hint,
            growth_constant=self.growth_constant,
        )


class ExperimentConfig(_Strict):
    h_list: List[float] = Field(default_factory=lambda: [2.0**-k for k in range(6)])
    test_function: str = "sinexp"
    n_points: int = Field(33, ge=1)
    seed: int = 42
    degrees: Optional[List[int]] = None  # default 0..2d-1
    radii: Optional[List[float]] = None  # decay radii, default per d
    separation: float = Field(1.0, gt=0.0)  # pd-check distance r
    decade: Optional[List[float]] = None  # flatness decade at 2*pi*j
    flat_at: List[int] = Field(default_factory=lambda: [1])  # lattice point j of 2*pi*j
    workers: int = Field(1, ge=1)

    @field_validator("test_function")
    def _known_function(cls, v):
        test_function(v, 1)  # raises on unknown tags
        return v

    @field_validator("h_list")
    def _geometric(cls, v):
        if len(v) < 2:
            return v
        for a, b in zip(v, v[1:]):
            if not math.isclose(a / b, 2.0, rel_tol=1e-12):
                raise ValueError(f"h_list must halve at every step, got {a} -> {b}")
        return v

    @field_validator("decade")
    def _decade_ok(cls, v):
        if v is None:
            return v
        if len(v) != 2 or not 0 < v[0] < v[1] < math.pi:
            raise ValueError(f"decade must be [r_min, r_max] with 0 < r_min < r_max < pi, got {v}")
        return v


class IOConfig(_Strict):
    out_dir: str = "outputs"
    report_name: str = "report.json"
    samples_name: str = "samples.csv"
    save_csv: bool = True
    save_stencil: bool = True

    @field_validator("report_name", "samples_name")
    def _plain_name(cls, v):
        if "/" in v or "\\" in v or v in ("", ".", ".."):
            raise ValueError(f"file names must not contain path separators, got '{v}'")
        return v


# ------------------------------------------------------------------------------
# Top-level config schema (YAML / JSON)
# ------------------------------------------------------------------------------


class TopConfig(_Strict):
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    fourier: FourierConfig = Field(default_factory=FourierConfig)
    stencil: StencilConfig = Field(default_factory=StencilConfig)
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    experiment: ExperimentConfig = Field(default_factory=ExperimentConfig)
    io: IOConfig = Field(default_factory=IOConfig)
    check: bool = False

    def model_post_init(self, __context):
        """Cross-field rules"""
        d = self.params.d
        if self.lattice.degree_hint >= 2 * d:
            raise ValueError(
                f"lattice.degree_hint must be < 2d = {2 * d}, got {self.lattice.degree_hint}"
            )
        if self.experiment.degrees and max(self.experiment.degrees) > 2 * d - 1:
            raise ValueError(f"experiment.degrees must not exceed 2d - 1 = {2 * d - 1}")
        if len(self.experiment.flat_at) not in (1, self.params.n):
            raise ValueError(
                f"experiment.flat_at needs 1 or {self.params.n} entries, got {self.experiment.flat_at}"
            )
