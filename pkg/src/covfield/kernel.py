"""Gaussian covariance kernel: pointwise evaluation, matrix assembly, and the
gradient (Lipschitz) bound.

The kernel is ``beta * exp(-||u - v||^2 / (2 sigma^2))`` with bandwidth
``sigma``, prior variance ``beta`` (default 1) and observation-noise level
``tau`` (default 0; enters linear systems as ``tau^2 I``, never the kernel
values themselves).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import PointSet, as_point


@dataclass(frozen=True)
class KernelConfig:
    sigma: float
    beta: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


def kernel_eval(u, v, cfg: KernelConfig) -> float:
    """beta * exp(-||u-v||^2 / (2 sigma^2)) for two points of equal dimension."""
    pu = as_point(u)
    pv = as_point(v, pu.shape[0])
    sq = float(np.sum((pu - pv) ** 2))
    return cfg.beta * math.exp(-sq / (2.0 * cfg.sigma**2))


def kernel_matrix(U: PointSet, V: PointSet, cfg: KernelConfig) -> np.ndarray:
    """Dense |U| x |V| kernel matrix.

    Squared distances are formed per entry from coordinate differences (no
    norm expansion), so the diagonal of ``kernel_matrix(X, X, cfg)`` is exactly
    ``beta`` and the matrix is exactly symmetric.
    """
    if U.d != V.d:
        raise ValueError(f"dimension mismatch: {U.d} vs {V.d}")
    sq = cdist(U.coords, V.coords, "sqeuclidean")
    return cfg.beta * np.exp(-sq / (2.0 * cfg.sigma**2))


def lipschitz_bound(cfg: KernelConfig) -> float:
    """Upper bound beta / (sigma * sqrt(e)) on ||grad kernel|| in one argument."""
    return cfg.beta / (cfg.sigma * math.sqrt(math.e))
