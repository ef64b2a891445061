import numpy as np
import pytest

from extremal.core.verification import NONNEG_TABLE, SYMMETRIC_TABLE, witness_tensor
from extremal.schemas.spectral import EstimatorConfig


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fast_cfg():
    """Estimator settings small enough for unit tests."""
    return EstimatorConfig(starts=8, max_iters=300, tol=1e-12, seed=0)


@pytest.fixture
def table_cfg():
    return EstimatorConfig(starts=64, max_iters=1000, tol=1e-13, seed=0)


@pytest.fixture
def nonneg_witnesses():
    """label -> (witness tensor, expected ratio, tolerance) for the nonnegative table."""
    return {
        label: (witness_tensor(shape, ones), expected, tol)
        for label, shape, ones, expected, _, tol, _ in NONNEG_TABLE
    }


@pytest.fixture
def symmetric_witnesses():
    return {
        label: (witness_tensor(shape, ones), expected, tol)
        for label, shape, ones, expected, _, tol, _ in SYMMETRIC_TABLE
    }


@pytest.fixture
def db_url(tmp_path):
    return f"sqlite:///{tmp_path / 'runs.db'}"
