import time

import numpy as np
import pytest

from covfield import (
    DivergenceError,
    KernelConfig,
    PointSet,
    SchurComplement,
    afn_build,
    bandwidth_percentile,
    fit,
    fsai_build,
    generate_gaussian_cloud,
    geometric_pattern,
    kernel_matrix,
    pcg,
    random_pattern,
    run_methods,
)
from covfield.precond import pattern_nnz


def split(X, r, seed):
    perm = np.random.default_rng(seed).permutation(X.n)
    return PointSet(X.coords[perm[:r]]), PointSet(X.coords[perm[r:]])


class TestSchurComplement:
    def test_matches_posterior_cov(self):
        X = generate_gaussian_cloud(80, 2, 0)
        cfg = KernelConfig(sigma=0.6)
        S, T = split(X, 20, 1)
        schur = SchurComplement(S, T, cfg)
        model = fit(S, cfg)
        rng = np.random.default_rng(2)
        for _ in range(100):
            i, j = rng.integers(0, T.n, 2)
            want = model.cov(T.coords[i], T.coords[j])
            assert schur.entry(int(i), int(j)) == pytest.approx(want, abs=1e-12)

    def test_diagonal_nearly_nonnegative(self):
        X = generate_gaussian_cloud(100, 3, 3)
        cfg = KernelConfig(sigma=0.7)
        S, T = split(X, 30, 4)
        schur = SchurComplement(S, T, cfg)
        diag = schur.block(np.arange(T.n)).diagonal()
        assert diag.min() >= -1e-8 * cfg.beta

    def test_zero_when_point_duplicated_into_landmarks(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.4, 0.4]])
        S = PointSet(pts[:3])
        T = PointSet(pts[[0, 3]])  # T[0] is also a landmark
        schur = SchurComplement(S, T, KernelConfig(sigma=0.8))
        assert abs(schur.entry(0, 0)) <= 1e-10

    def test_noise_enters_diagonal_only(self):
        X = generate_gaussian_cloud(40, 2, 5)
        cfg = KernelConfig(sigma=0.6, tau=0.1)
        S, T = split(X, 10, 6)
        schur = SchurComplement(S, T, cfg)
        J = np.arange(5)
        plain = schur.block(J)
        noisy = schur.block(J, include_noise=True)
        np.testing.assert_allclose(noisy - plain, cfg.tau**2 * np.eye(5), atol=1e-15)


class TestPatterns:
    def test_geometric_zero_radius(self):
        T = generate_gaussian_cloud(30, 2, 7)
        rows = geometric_pattern(T, 0.0)
        assert all(np.array_equal(J, [i]) for i, J in enumerate(rows))

    def test_geometric_fraction_on_benchmark_instance(self):
        X = generate_gaussian_cloud(1000, 3, 42)
        sigma = bandwidth_percentile(X, 2)
        _, T = split(X, 200, 43)
        rows = geometric_pattern(T, 2 * sigma)
        frac = pattern_nnz(rows) / T.n**2
        assert 0.05 <= frac <= 0.09  # expected around 7 % on this instance class

    def test_random_rows_capped(self):
        rows = random_pattern(200, 0.1, seed=0)
        cap = int(0.1 * 200)
        for i, J in enumerate(rows):
            assert len(J) == min(i, cap) + 1
            assert J[-1] == i

    def test_random_requires_valid_cap(self):
        with pytest.raises(ValueError):
            random_pattern(10, 0.0, seed=0)


class TestFsai:
    def test_diagonal_case(self):
        diag = np.array([4.0, 9.0, 16.0])
        block = lambda J: np.diag(diag[J])  # noqa: E731
        G = fsai_build(block, [np.array([i]) for i in range(3)]).toarray()
        np.testing.assert_allclose(G, np.diag(1.0 / np.sqrt(diag)))

    def test_full_pattern_is_dense_inverse(self):
        X = PointSet(3.0 * generate_gaussian_cloud(60, 2, 8).coords)
        cfg = KernelConfig(sigma=0.6)
        S, T = split(X, 20, 9)
        schur = SchurComplement(S, T, cfg)
        R = schur.block(np.arange(T.n))
        rows = [np.arange(i + 1) for i in range(40)]
        G = fsai_build(schur.block, rows).toarray()
        np.testing.assert_allclose(G.T @ G, np.linalg.inv(R), atol=1e-8)

    def test_unit_diagonal_of_preconditioned_block(self):
        X = generate_gaussian_cloud(120, 3, 10)
        cfg = KernelConfig(sigma=0.8)
        S, T = split(X, 40, 11)
        schur = SchurComplement(S, T, cfg)
        rows = geometric_pattern(T, 2 * cfg.sigma)
        G = fsai_build(schur.block, rows)
        R = schur.block(np.arange(T.n))
        diag = (G @ R @ G.T).diagonal()
        np.testing.assert_allclose(diag, 1.0, atol=1e-10)

    def test_bad_pattern_rejected(self):
        block = lambda J: np.eye(len(J))  # noqa: E731
        with pytest.raises(ValueError):
            fsai_build(block, [np.array([0]), np.array([0])])  # missing diagonal 1


class TestAfn:
    def test_full_pattern_preconditions_exactly(self):
        # r = n-1 landmarks and a full FSAI pattern make M^{-1} K the identity
        rng = np.random.default_rng(12)
        X = PointSet(3.0 * rng.standard_normal((60, 2)))
        cfg = KernelConfig(sigma=0.5)
        K = kernel_matrix(X, X, cfg)
        P = afn_build(X, cfg, r=59, pattern="geometric", delta=1e9, landmark_seed=13)
        MiK = np.column_stack([P.apply_inverse(K[:, j]) for j in range(60)])
        eigs = np.linalg.eigvals(MiK)
        np.testing.assert_allclose(eigs, 1.0, atol=1e-6)

    def test_apply_inverse_pair(self):
        X = generate_gaussian_cloud(150, 3, 14)
        cfg = KernelConfig(sigma=0.8)
        P = afn_build(X, cfg, r=30, delta=2 * cfg.sigma, landmark_seed=15)
        v = np.random.default_rng(16).standard_normal(150)
        np.testing.assert_allclose(P.apply(P.apply_inverse(v)), v, atol=1e-8)
        np.testing.assert_allclose(P.apply_inverse(P.apply(v)), v, atol=1e-8)

    def test_apply_inverse_linear_and_symmetric(self):
        X = PointSet(3.0 * generate_gaussian_cloud(100, 2, 17).coords)
        cfg = KernelConfig(sigma=0.6)
        P = afn_build(X, cfg, r=25, delta=2 * cfg.sigma, landmark_seed=18)
        rng = np.random.default_rng(19)
        u, v = rng.standard_normal((2, 100))
        a, b = 0.3, -1.7
        np.testing.assert_allclose(
            P.apply_inverse(a * u + b * v),
            a * P.apply_inverse(u) + b * P.apply_inverse(v),
            atol=1e-12,
        )
        assert P.apply_inverse(u) @ v == pytest.approx(u @ P.apply_inverse(v), abs=1e-10)

    def test_zero_maps_to_zero(self):
        X = generate_gaussian_cloud(50, 2, 20)
        P = afn_build(X, KernelConfig(sigma=0.5), r=10, delta=1.0, landmark_seed=21)
        np.testing.assert_array_equal(P.apply_inverse(np.zeros(50)), np.zeros(50))

    def test_build_time_budget(self):
        X = generate_gaussian_cloud(1000, 3, 42)
        sigma = bandwidth_percentile(X, 2)
        cfg = KernelConfig(sigma=sigma, tau=0.004)
        t0 = time.perf_counter()
        afn_build(X, cfg, r=200, delta=2 * sigma, landmark_seed=43)
        assert time.perf_counter() - t0 < 10.0

    def test_rank_bounds(self):
        X = generate_gaussian_cloud(20, 2, 22)
        with pytest.raises(ValueError):
            afn_build(X, KernelConfig(sigma=0.5), r=20)


class TestPcg:
    def test_identity_one_iteration(self):
        b = np.random.default_rng(23).standard_normal(30)
        x, iters, hist = pcg(np.eye(30), b)
        np.testing.assert_allclose(x, b, atol=1e-14)
        assert iters == 1 and len(hist) == 1

    def test_diagonal_matches_dense_solve(self):
        A = np.diag(np.arange(1.0, 11.0))
        b = np.ones(10)
        x, iters, _ = pcg(A, b, tol_abs=1e-10)
        assert iters <= 10
        np.testing.assert_allclose(x, np.linalg.solve(A, b), atol=1e-8)

    def test_exact_inverse_preconditioner_two_iterations(self):
        rng = np.random.default_rng(24)
        Q = rng.standard_normal((40, 40))
        A = Q @ Q.T + 40 * np.eye(40)
        b = rng.standard_normal(40)
        inv = np.linalg.inv(A)
        x, iters, _ = pcg(A, b, lambda v: inv @ v, tol_abs=1e-10)
        assert iters <= 2
        np.testing.assert_allclose(x, inv @ b, atol=1e-8)

    def test_energy_norm_monotone(self):
        rng = np.random.default_rng(25)
        Q = rng.standard_normal((25, 25))
        A = Q @ Q.T + 5 * np.eye(25)
        b = rng.standard_normal(25)
        xstar = np.linalg.solve(A, b)
        energies = []
        for k in range(1, 15):
            x, _, _ = pcg(A, b, tol_abs=1e-14, max_iter=k)
            e = x - xstar
            energies.append(float(e @ A @ e))
        assert all(a >= b - 1e-12 for a, b in zip(energies, energies[1:]))

    def test_divergence_error(self):
        bad = lambda v: np.full_like(v, np.nan)  # noqa: E731
        with pytest.raises(DivergenceError):
            pcg(bad, np.ones(5))

    def test_tolerance_validation(self):
        with pytest.raises(ValueError):
            pcg(np.eye(3), np.ones(3), tol_abs=0.0)

    def test_residual_history_per_iteration(self):
        A = np.diag(np.arange(1.0, 21.0))
        b = np.ones(20)
        _, iters, hist = pcg(A, b, tol_abs=1e-12)
        assert len(hist) == iters
        assert hist[-1] <= 1e-12


class TestMethodOrdering:
    def test_small_instance_ranking(self):
        # geometric AFN beats the random pattern at equal iteration budget,
        # and plain CG trails both
        X = generate_gaussian_cloud(300, 3, 26)
        sigma = bandwidth_percentile(X, 2)
        cfg = KernelConfig(sigma=sigma, tau=0.004)
        rows = run_methods(
            X, cfg, r=60, delta=2 * sigma,
            landmark_seed=27, pattern_seed=28, rhs_seed=29,
        )
        by = {r["method"]: r for r in rows}
        assert by[3]["iterations"] < by[2]["iterations"]
        assert by[3]["iterations"] < by[1]["iterations"]
        A = kernel_matrix(X, X, cfg) + cfg.tau**2 * np.eye(X.n)
        b = np.random.default_rng(29).standard_normal(X.n)
        b /= np.linalg.norm(b)
        P2 = afn_build(
            X, cfg, r=60, pattern="random", landmark_seed=27, pattern_seed=28
        )
        _, _, hist2 = pcg(A, b, P2.apply_inverse, max_iter=by[3]["iterations"])
        assert hist2[-1] >= by[3]["residual"] - 1e-12
