import numpy as np
import pytest

from covfield import KernelConfig, PointSet, kernel_matrix, preset_observations


def dense_posterior_oracle(S: PointSet, X: PointSet, Y: PointSet, cfg: KernelConfig):
    """Posterior covariance via the explicit dense inverse - the independent
    reference all fast paths are checked against."""
    K_SS = kernel_matrix(S, S, cfg)
    if cfg.tau > 0:
        K_SS = K_SS + cfg.tau**2 * np.eye(S.n)
    inv = np.linalg.inv(K_SS)
    return kernel_matrix(X, Y, cfg) - kernel_matrix(X, S, cfg) @ inv @ kernel_matrix(S, Y, cfg)


@pytest.fixture
def uniform1d():
    return preset_observations("uniform1d")


@pytest.fixture
def nonuniform1d():
    return preset_observations("nonuniform1d")


def unit_grid(n: int) -> PointSet:
    return PointSet(np.linspace(0.0, 1.0, n)[:, None])
