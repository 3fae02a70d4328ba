"""Exact conditioning on an observation set.

``fit`` factors ``K_SS + tau^2 I`` once (Cholesky, with an escalating jitter
ladder for numerically singular cases); the returned model evaluates the
posterior mean, the posterior covariance field

    R(x, y) = kernel(x, y) - K_xS (K_SS + tau^2 I)^{-1} K_Sy,

the posterior variance R(x, x), and the grid supremum of the cross-weight
norm ||(K_SS + tau^2 I)^{-1} K_Sy||_p.

The model is immutable after ``fit``; all evaluations are read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import IllConditionedKernelError, NumericalConsistencyError
from .geometry import PointSet, as_point
from .kernel import KernelConfig, kernel_eval, kernel_matrix

JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)


def jittered_cholesky(A: np.ndarray, scale: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``A + j*scale*I`` for the smallest ladder
    jitter ``j`` that succeeds.  Returns ``(L, j*scale)``."""
    n = A.shape[0]
    for j in JITTER_LADDER:
        try:
            L = np.linalg.cholesky(A if j == 0.0 else A + (j * scale) * np.eye(n))
            return L, j * scale
        except np.linalg.LinAlgError:
            continue
    raise IllConditionedKernelError(
        f"Cholesky failed for a {n} x {n} kernel block even with jitter "
        f"{JITTER_LADDER[-1] * scale:g}"
    )


@dataclass(frozen=True)
class PosteriorModel:
    S: PointSet
    cfg: KernelConfig
    chol: np.ndarray = field(repr=False)          # lower factor of K_SS + (tau^2 + jitter) I
    jitter_used: float = 0.0
    _obs_index: dict = field(repr=False, default_factory=dict)

    @property
    def r(self) -> int:
        return self.S.n

    @property
    def _exact_at_obs(self) -> bool:
        # with tau = 0 and no jitter, the cross weights at an observation
        # point are exactly a standard basis vector
        return self.cfg.tau == 0.0 and self.jitter_used == 0.0

    def _lookup_obs(self, y: np.ndarray) -> int | None:
        return self._obs_index.get(y.tobytes())

    def cross_weights(self, y) -> np.ndarray:
        """Solve (K_SS + (tau^2 + jitter) I) w = K_Sy."""
        p = as_point(y, self.S.d)
        if self._exact_at_obs:
            j = self._lookup_obs(p)
            if j is not None:
                w = np.zeros(self.r)
                w[j] = 1.0
                return w
        k = kernel_matrix(self.S, PointSet(p[None, :]), self.cfg)[:, 0]
        return cho_solve((self.chol, True), k)

    def cov(self, x, y) -> float:
        """Posterior covariance R(x, y).

        Evaluated with the lexicographically smaller argument in the
        cross-weight slot, so cov(x, y) and cov(y, x) are bit-identical.
        """
        px = as_point(x, self.S.d)
        py = as_point(y, self.S.d)
        if tuple(py) > tuple(px):
            px, py = py, px
        w = self.cross_weights(py)
        k_xs = kernel_matrix(PointSet(px[None, :]), self.S, self.cfg)[0]
        return kernel_eval(px, py, self.cfg) - float(k_xs @ w)

    def cov_matrix(self, X: PointSet, Y: PointSet) -> np.ndarray:
        """Posterior covariance matrix R(X, Y); symmetrized when X equals Y."""
        same = X is Y or (X.n == Y.n and np.array_equal(X.coords, Y.coords))
        A = solve_triangular(self.chol, kernel_matrix(self.S, X, self.cfg), lower=True)
        B = A if same else solve_triangular(
            self.chol, kernel_matrix(self.S, Y, self.cfg), lower=True
        )
        R = kernel_matrix(X, Y, self.cfg) - A.T @ B
        if same:
            R = 0.5 * (R + R.T)
        return R

    def mean(self, obs_values, X: PointSet) -> np.ndarray:
        """Posterior mean K_XS (K_SS + tau^2 I)^{-1} y at the points of X."""
        y = np.asarray(obs_values, dtype=float)
        if y.shape != (self.r,):
            raise ValueError(f"expected {self.r} observation values, got shape {y.shape}")
        alpha = cho_solve((self.chol, True), y)
        return kernel_matrix(X, self.S, self.cfg) @ alpha

    def variance(self, x) -> float:
        """Posterior variance R(x, x); slightly negative values are clipped
        against the -1e-8 * beta consistency floor."""
        v = self.cov(x, x)
        if v < -1e-8 * self.cfg.beta:
            raise NumericalConsistencyError(
                f"posterior variance {v:g} below -1e-8 * beta; factorization unsound"
            )
        return v


def fit(S: PointSet, cfg: KernelConfig) -> PosteriorModel:
    """Factor K_SS + tau^2 I (jitter ladder 1e-12*beta .. 1e-6*beta on
    failure) and return the evaluation handle.

    Raises ValueError for duplicate observation points and
    IllConditionedKernelError when the ladder is exhausted.
    """
    if np.unique(S.coords, axis=0).shape[0] != S.n:
        raise ValueError("observation points must be pairwise distinct")
    K = kernel_matrix(S, S, cfg)
    if cfg.tau > 0:
        K = K + cfg.tau**2 * np.eye(S.n)
    L, jitter = jittered_cholesky(K, cfg.beta)
    index = {S.coords[i].tobytes(): i for i in range(S.n)}
    return PosteriorModel(S=S, cfg=cfg, chol=L, jitter_used=jitter, _obs_index=index)


def max_cross_weight_norm(model: PosteriorModel, grid: PointSet, p=2) -> float:
    """Max over grid points y of ||(K_SS + tau^2 I)^{-1} K_Sy||_p.

    A grid approximation (lower estimate) of the supremum over R^d; it equals
    1 exactly at observation points when tau = 0 and no jitter was used.
    p must be 1, 2 or inf.
    """
    if grid.d != model.S.d:
        raise ValueError(f"dimension mismatch: {grid.d} vs {model.S.d}")
    if p not in (1, 2, np.inf):
        raise ValueError("p must be 1, 2 or inf")
    K = kernel_matrix(model.S, grid, model.cfg)
    W = cho_solve((model.chol, True), K)
    if model._exact_at_obs:
        for i in range(grid.n):
            j = model._lookup_obs(grid.coords[i])
            if j is not None:
                W[:, i] = 0.0
                W[j, i] = 1.0
    return float(np.max(np.linalg.norm(W, ord=p, axis=0)))
