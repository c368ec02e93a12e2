import numpy as np
import pytest

from utils.cost import ProblemSpec


@pytest.fixture
def default_spec():
    """Default numerics: alpha_A = ||L|| = 1, unit norms, eps = 1e-10, beta = 0.75"""
    return ProblemSpec(t=1e4)


@pytest.fixture
def small_spec():
    """An instance whose quadrature plan is small enough to materialise"""
    return ProblemSpec(t=1.0, eps_total=1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    out = tmp_path / "results"
    monkeypatch.setenv("LCHS_OUTPUT_DIR", str(out))
    return out
