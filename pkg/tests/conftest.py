"""
Shared pytest fixtures for all test modules.
"""

import tempfile
from pathlib import Path

import numpy as np
import pytest

from quasi_interp_pkg.config import IOConfig, TopConfig
from quasi_interp_pkg.lagrange import LatticeSumSettings
from quasi_interp_pkg.specfun import RbfParams
from quasi_interp_pkg.symbol import Stencil, build_stencil


@pytest.fixture
def seed():
    """Fixed random seed for reproducibility"""
    return 42


@pytest.fixture
def rng(seed):
    """Numpy random generator with fixed seed"""
    return np.random.default_rng(seed)


@pytest.fixture
def temp_output_dir():
    """Temporary directory for test outputs"""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def params_11():
    """Classical multiquadric on the line: c=1, d=1, n=1"""
    return RbfParams(1.0, 1, 1)


@pytest.fixture
def params_13():
    """c=1, d=3, n=1"""
    return RbfParams(1.0, 3, 1)


@pytest.fixture(scope="session")
def stencil_11():
    """Minimal stencil for (n, d) = (1, 1): {0: -1, +-1: 1/2}"""
    return build_stencil(RbfParams(1.0, 1, 1))


@pytest.fixture(scope="session")
def stencil_13():
    """Minimal stencil for (n, d) = (1, 3), support radius 4"""
    return build_stencil(RbfParams(1.0, 3, 1))


@pytest.fixture(scope="session")
def stencil_31():
    """Minimal stencil for (n, d) = (3, 1), support radius 2"""
    return build_stencil(RbfParams(1.0, 1, 3))


@pytest.fixture
def hand_stencil_11(params_11):
    """The (1, 1) stencil written out by hand"""
    return Stencil.from_entries(params_11, {-1: 0.5, 0: -1.0, 1: 0.5})


@pytest.fixture
def settings_1d():
    """Lattice settings used for one-dimensional reproduction checks"""
    return LatticeSumSettings(truncation_radius=10_000, tail_tolerance=1e-3)


@pytest.fixture
def minimal_config(temp_output_dir):
    """Minimal valid configuration writing into a temporary directory"""
    return TopConfig(
        io=IOConfig(out_dir=str(temp_output_dir)),
    )
