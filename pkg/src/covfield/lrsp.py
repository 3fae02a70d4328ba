"""Low-rank plus sparse (LRSP) approximation of kernel matrices.

The low-rank half is the landmark (Nystrom) factorization
``K ~= W^T W`` with ``W = L^{-1} K_{SX}`` and ``L`` the Cholesky factor of the
landmark block.  The sparse half corrects the residual exactly on a
distance-thresholded pattern; since the residual *is* the posterior
covariance field, its large entries sit at nearby point pairs in the
small-bandwidth regime, which is what the pattern captures.

Storage accounting uses the cost-equivalent rank: the rank k whose plain
low-rank storage k^2 + N k matches the LRSP storage r0^2 + N r0 + nnz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .geometry import PointSet
from .kernel import KernelConfig, kernel_matrix
from .posterior import fit

_CHUNK = 256


@dataclass(frozen=True)
class NystromFactor:
    """Landmark indices into X and the factor W with W^T W ~= K_XX."""

    landmark_indices: np.ndarray
    W: np.ndarray = field(repr=False)   # r0 x n

    @property
    def rank(self) -> int:
        return self.W.shape[0]


def nystrom_build(X: PointSet, landmark_indices, cfg: KernelConfig) -> NystromFactor:
    """Factor the landmark block (posterior-module jitter policy) and form
    W = L^{-1} K_{SX}."""
    idx = np.asarray(landmark_indices, dtype=int)
    if idx.ndim != 1 or len(np.unique(idx)) != len(idx):
        raise ValueError("landmark indices must be a 1-d list of distinct indices")
    if idx.min() < 0 or idx.max() >= X.n:
        raise ValueError("landmark index out of range")
    S = PointSet(X.coords[idx])
    model = fit(S, cfg)
    W = solve_triangular(model.chol, kernel_matrix(S, X, cfg), lower=True)
    return NystromFactor(landmark_indices=idx, W=W)


def lowrank_dense(factor: NystromFactor) -> np.ndarray:
    """Dense n x n reconstruction W^T W (desk scale only)."""
    return factor.W.T @ factor.W


def pattern_by_radius(X: PointSet, delta: float) -> sp.csr_matrix:
    """Boolean symmetric pattern {(i, j): ||x_i - x_j|| <= delta}; the
    diagonal is always included.  Built by chunked brute-force scans."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    n = X.n
    rows, cols = [], []
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        d = cdist(X.coords[lo:hi], X.coords)
        r, c = np.nonzero(d <= delta)
        rows.append(r + lo)
        cols.append(c)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    pat = sp.csr_matrix(
        (np.ones(len(rows), dtype=bool), (rows, cols)), shape=(n, n)
    )
    pat.setdiag(True)
    pat.sort_indices()
    return pat


def sparse_correction(
    X: PointSet, factor: NystromFactor, pattern: sp.csr_matrix, cfg: KernelConfig
) -> sp.csr_matrix:
    """Residual entries kernel(x_i, x_j) - (W^T W)_ij on the (symmetric)
    pattern only.

    One W-column dot product per stored upper-triangle entry, mirrored so the
    stored values are bitwise symmetric; the dense residual is never formed
    here (only test oracles do that).
    """
    pat = pattern.tocsr()
    pat.sort_indices()
    n = X.n
    W = factor.W
    rows_out, cols_out, vals_out = [], [], []
    indptr, indices = pat.indptr, pat.indices
    for i in range(n):
        J = indices[indptr[i]: indptr[i + 1]]
        J = J[J >= i]
        if len(J) == 0:
            continue
        krow = kernel_matrix(PointSet(X.coords[i][None, :]), PointSet(X.coords[J]), cfg)[0]
        vals = krow - W[:, i] @ W[:, J]
        rows_out.append(np.full(len(J), i))
        cols_out.append(J)
        vals_out.append(vals)
        off = J > i
        rows_out.append(J[off])
        cols_out.append(np.full(int(off.sum()), i))
        vals_out.append(vals[off])
    out = sp.csr_matrix(
        (np.concatenate(vals_out), (np.concatenate(rows_out), np.concatenate(cols_out))),
        shape=(n, n),
    )
    out.sort_indices()
    return out


def lrsp_dense(factor: NystromFactor, correction: sp.csr_matrix) -> np.ndarray:
    """Dense reconstruction of the LRSP approximation (desk scale only)."""
    return lowrank_dense(factor) + correction.toarray()


def cost_equivalent_rank(r0: float, N: float, nnz: float) -> float:
    """Positive root k of k^2 + N k = r0^2 + N r0 + nnz.

    The rank of an imaginary plain low-rank factorization with the same
    storage as the LRSP format; real-valued by design.
    """
    if N < 1 or r0 < 0 or nnz < 0:
        raise ValueError("need N >= 1, r0 >= 0, nnz >= 0")
    return 0.5 * (-N + np.sqrt(N * N + 4.0 * (r0 * r0 + N * r0 + nnz)))


def error_max_norm(X: PointSet, cfg: KernelConfig, approx: np.ndarray) -> float:
    """max_ij |K_XX - approx| against the dense reference (n <= desk scale)."""
    return float(np.abs(kernel_matrix(X, X, cfg) - approx).max())


def error_two_norm_randomized(
    X: PointSet, cfg: KernelConfig, approx: np.ndarray, seed: int
) -> float:
    """||E v|| / ||v|| for E = K_XX - approx and v standard normal per seed;
    a lower estimate of the spectral norm."""
    E = kernel_matrix(X, X, cfg) - approx
    v = np.random.default_rng(seed).standard_normal(X.n)
    return float(np.linalg.norm(E @ v) / np.linalg.norm(v))
