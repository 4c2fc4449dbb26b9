"""Smooth oracles, regularizers, and their contracts."""

import numpy as np
import pytest

from blockcoord.blocks import BlockPartition, LWeights, l_norm
from blockcoord.oracles import (
    BoxIndicator,
    L1Reg,
    LeastSquaresOracle,
    ProblemFormatError,
    ProblemInstance,
    QuadraticOracle,
    SquaredL2Reg,
    ZeroReg,
    _block_spectral_norm,
    quadratic_mu,
    soft_threshold_block,
)
from conftest import random_problem
from scalar_oracles import grid_min, solve_scalar_prox


def small_quadratic(seed=0, sizes=(2, 1, 3)):
    rng = np.random.default_rng(seed)
    part = BlockPartition(sizes)
    N = part.total_dim
    G = rng.standard_normal((N, N))
    A = G @ G.T / N + 0.1 * np.eye(N)
    b = rng.standard_normal(N)
    return QuadraticOracle(part, A, b)


class TestQuadraticOracle:
    def test_gradient_finite_differences(self):
        smooth = small_quadratic(1)
        part = smooth.partition
        rng = np.random.default_rng(2)
        h = 1e-6
        for _ in range(100):
            x = rng.standard_normal(part.total_dim)
            i = int(rng.integers(part.n))
            grad = smooth.partial_grad(x, i)
            sl = part.block_slice(i)
            for local_j, j in enumerate(range(sl.start, sl.stop)):
                e = np.zeros(part.total_dim)
                e[j] = h
                fd = (smooth.eval(x + e) - smooth.eval(x - e)) / (2 * h)
                assert fd == pytest.approx(
                    grad[local_j], rel=1e-5, abs=1e-5
                )

    def test_full_grad_assembles_partials_exactly(self):
        smooth = small_quadratic(3)
        rng = np.random.default_rng(4)
        x = rng.standard_normal(smooth.partition.total_dim)
        parts = np.concatenate(
            [smooth.partial_grad(x, i) for i in range(smooth.partition.n)]
        )
        assert np.array_equal(smooth.full_grad(x), parts)

    def test_block_descent_inequality(self):
        smooth = small_quadratic(5)
        part = smooth.partition
        L = smooth.lipschitz().per_block
        rng = np.random.default_rng(6)
        for _ in range(1000):
            x = rng.standard_normal(part.total_dim)
            i = int(rng.integers(part.n))
            sl = part.block_slice(i)
            h = rng.standard_normal(sl.stop - sl.start)
            y = x.copy()
            y[sl] += h
            lhs = smooth.eval(y)
            rhs = (
                smooth.eval(x)
                + float(smooth.partial_grad(x, i) @ h)
                + 0.5 * L[i] * float(h @ h)
            )
            assert lhs <= rhs + 1e-9 * max(1.0, abs(rhs))

    def test_lipschitz_constants_are_tight(self):
        # along the top eigenvector of a diagonal block, 0.99 L_i fails
        smooth = small_quadratic(7)
        part = smooth.partition
        L = smooth.lipschitz().per_block
        x = np.zeros(part.total_dim)
        for i in range(part.n):
            sl = part.block_slice(i)
            block = smooth.A[sl, sl]
            _, vecs = np.linalg.eigh(block)
            h = vecs[:, -1]
            y = x.copy()
            y[sl] += h
            gain = smooth.eval(y) - smooth.eval(x) - float(smooth.partial_grad(x, i) @ h)
            assert gain > 0.5 * 0.99 * L[i] * float(h @ h)

    def test_mu_strong_convexity_inequality(self):
        smooth = small_quadratic(8)
        w = smooth.lipschitz()
        mu = smooth.mu_f()
        assert 0.0 <= mu <= 1.0
        rng = np.random.default_rng(9)
        for _ in range(200):
            x = rng.standard_normal(smooth.partition.total_dim)
            y = rng.standard_normal(smooth.partition.total_dim)
            lhs = smooth.eval(y)
            rhs = (
                smooth.eval(x)
                + float(smooth.full_grad(x) @ (y - x))
                + 0.5 * mu * l_norm(y - x, w) ** 2
            )
            assert lhs >= rhs - 1e-9 * max(1.0, abs(lhs))

    def test_rejects_asymmetric(self):
        part = BlockPartition((2,))
        with pytest.raises(ProblemFormatError):
            QuadraticOracle(part, [[1.0, 0.5], [0.2, 1.0]], [0.0, 0.0])

    def test_rejects_zero_diagonal_block(self):
        part = BlockPartition((1, 1))
        with pytest.raises(ProblemFormatError):
            QuadraticOracle(part, [[1.0, 0.0], [0.0, 0.0]], [0.0, 0.0])


class TestQuadraticMu:
    def test_identity(self):
        part = BlockPartition((1, 1, 1))
        w = LWeights(part, np.ones(3))
        assert quadratic_mu(np.eye(3), w) == 1.0

    def test_diagonal_scaling(self):
        part = BlockPartition((1, 1))
        w = LWeights(part, np.array([1.0, 4.0]))
        assert quadratic_mu(np.diag([1.0, 4.0]), w) == 1.0

    def test_two_by_two(self):
        # scaled matrix [[1, .5], [.5, 1]] has lambda_min = 1 - 1/2
        part = BlockPartition((1, 1))
        w = LWeights(part, np.array([2.0, 2.0]))
        A = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert quadratic_mu(A, w) == pytest.approx(0.5, rel=1e-14)

    def test_dimension_cap(self):
        N = 513
        part = BlockPartition((1,) * N)
        w = LWeights(part, np.ones(N))
        with pytest.raises(ProblemFormatError):
            quadratic_mu(np.eye(N), w)

    def test_mu_at_most_one(self, rng):
        for seed in range(5):
            r = np.random.default_rng(seed)
            part = BlockPartition((2, 3, 1))
            G = r.standard_normal((6, 6))
            A = G @ G.T
            smooth = QuadraticOracle(part, A, np.zeros(6))
            assert smooth.mu_f() <= 1.0


def test_power_iteration_matches_eigh():
    rng = np.random.default_rng(11)
    G = rng.standard_normal((70, 70))
    block = G @ G.T
    exact = float(np.linalg.eigvalsh(block)[-1])
    assert _block_spectral_norm(block) == pytest.approx(exact, rel=1e-8)


class TestLeastSquares:
    def test_reduces_to_quadratic(self):
        rng = np.random.default_rng(12)
        part = BlockPartition((2, 2, 1))
        M = rng.standard_normal((8, 5))
        y = rng.standard_normal(8)
        smooth = LeastSquaresOracle(part, M, y)
        for _ in range(20):
            x = rng.standard_normal(5)
            direct = 0.5 * float(np.sum((M @ x - y) ** 2))
            assert smooth.eval(x) == pytest.approx(direct, rel=1e-12, abs=1e-12)
            grad_direct = M.T @ (M @ x - y)
            assert np.allclose(smooth.full_grad(x), grad_direct, rtol=1e-10, atol=1e-10)

    def test_block_constants_are_column_norms(self):
        rng = np.random.default_rng(13)
        part = BlockPartition((2, 3))
        M = rng.standard_normal((6, 5))
        y = rng.standard_normal(6)
        smooth = LeastSquaresOracle(part, M, y)
        L = smooth.lipschitz().per_block
        for i in range(part.n):
            sl = part.block_slice(i)
            sigma_max = np.linalg.svd(M[:, sl], compute_uv=False)[0]
            assert L[i] == pytest.approx(sigma_max**2, rel=1e-10)


def test_soft_threshold_examples():
    z = np.array([0.5, -2.0, 0.1])
    assert np.array_equal(soft_threshold_block(z, np.zeros(3), 2.0), z)
    out = soft_threshold_block(np.array([0.5]), np.array([1.0]), 4.0)
    assert out[0] == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        soft_threshold_block(z, np.zeros(3), 0.0)


def test_soft_threshold_against_grid_search():
    # the documented scalar case: x=1, grad=2, L=4, lam=1 -> d = -0.75
    phi = lambda d: 2.0 * d + 2.0 * d * d + abs(1.0 + d)
    d_grid = grid_min(phi, -3.0, 3.0, 1e-5)
    u = soft_threshold_block(np.array([1.0 - 2.0 / 4.0]), np.array([1.0]), 4.0)
    assert u[0] - 1.0 == pytest.approx(-0.75, abs=1e-12)
    assert u[0] - 1.0 == pytest.approx(d_grid, abs=2e-5)


def test_soft_threshold_against_golden_section():
    rng = np.random.default_rng(14)
    for _ in range(200):
        x = rng.normal(scale=2.0)
        q = rng.normal(scale=2.0)
        li = rng.uniform(0.2, 5.0)
        lam = rng.uniform(0.0, 2.0)
        u = soft_threshold_block(np.array([x - q / li]), np.array([lam]), li)
        d_ref = solve_scalar_prox(q, x, li, "l1", lam=lam)
        assert u[0] - x == pytest.approx(d_ref, abs=1e-8)


class TestRegularizers:
    def test_separability(self, rng):
        part = BlockPartition((2, 3, 1))
        regs = [
            ZeroReg(part),
            L1Reg(part, rng.uniform(0, 1, 6)),
            BoxIndicator(part, -np.ones(6), np.ones(6)),
            SquaredL2Reg(part, rng.uniform(0.1, 1, 3)),
        ]
        x = rng.uniform(-0.9, 0.9, 6)
        for reg in regs:
            total = sum(reg.eval_block(i, part.block_view(x, i)) for i in range(3))
            assert reg.eval(x) == pytest.approx(total, rel=1e-14, abs=1e-14)

    def test_box_infinite_outside_never_nan(self):
        part = BlockPartition((2,))
        reg = BoxIndicator(part, np.zeros(2), np.ones(2))
        assert reg.eval(np.array([0.5, 1.5])) == np.inf
        assert reg.eval(np.array([0.5, 0.5])) == 0.0
        assert not np.isnan(reg.eval(np.array([2.0, 2.0])))

    def test_prox_optimality_membership(self):
        # subgradient characterization: -(q + L d) must lie in dPsi_i(x_i + d)
        rng = np.random.default_rng(15)
        part = BlockPartition((3,))
        w = np.array([1.7])
        cases = [
            ("zero", ZeroReg(part)),
            ("l1", L1Reg(part, np.array([0.4, 0.0, 1.2]))),
            ("box", BoxIndicator(part, -np.ones(3), np.ones(3))),
            ("sql2", SquaredL2Reg(part, np.array([0.6]))),
        ]
        for kind, reg in cases:
            for _ in range(300):
                x = rng.uniform(-1, 1, 3) if kind == "box" else rng.normal(size=3)
                q = rng.normal(scale=2.0, size=3)
                d = reg.prox_block(0, q, x, w[0])
                s = -(q + w[0] * d)
                z = x + d
                if kind == "zero":
                    assert np.max(np.abs(s)) <= 1e-10
                elif kind == "l1":
                    lam = np.array([0.4, 0.0, 1.2])
                    for j in range(3):
                        if z[j] > 1e-12:
                            assert s[j] == pytest.approx(lam[j], abs=1e-10)
                        elif z[j] < -1e-12:
                            assert s[j] == pytest.approx(-lam[j], abs=1e-10)
                        else:
                            assert abs(s[j]) <= lam[j] + 1e-10
                elif kind == "box":
                    for j in range(3):
                        if -1 + 1e-12 < z[j] < 1 - 1e-12:
                            assert abs(s[j]) <= 1e-10
                        elif z[j] <= -1 + 1e-12:
                            assert s[j] <= 1e-10
                        else:
                            assert s[j] >= -1e-10
                else:
                    assert np.allclose(s, 0.6 * z, atol=1e-10)

    def test_sql2_mu_psi(self):
        part = BlockPartition((2, 2))
        w = LWeights(part, np.array([2.0, 4.0]))
        reg = SquaredL2Reg(part, np.array([1.0, 1.0]))
        assert reg.mu_psi(w) == pytest.approx(0.25)

    def test_validation(self):
        part = BlockPartition((2,))
        with pytest.raises(ProblemFormatError):
            L1Reg(part, np.array([-0.1, 0.2]))
        with pytest.raises(ProblemFormatError):
            BoxIndicator(part, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        with pytest.raises(ProblemFormatError):
            SquaredL2Reg(part, np.array([-1.0]))


class TestProblemInstance:
    def test_rejects_infeasible_start(self):
        part = BlockPartition((2,))
        smooth = QuadraticOracle(part, np.eye(2), np.zeros(2))
        reg = BoxIndicator(part, np.zeros(2), np.ones(2))
        with pytest.raises(ProblemFormatError):
            ProblemInstance(smooth, reg, np.array([2.0, 0.5]))

    def test_rejects_nonfinite_start(self):
        part = BlockPartition((2,))
        smooth = QuadraticOracle(part, np.eye(2), np.zeros(2))
        with pytest.raises(ProblemFormatError):
            ProblemInstance(smooth, ZeroReg(part), np.array([np.nan, 0.0]))

    def test_objective_composition(self):
        problem = random_problem("lasso", seed=21)
        x = np.random.default_rng(0).standard_normal(problem.dim)
        assert problem.F(x) == pytest.approx(
            problem.smooth.eval(x) + problem.regularizer.eval(x), rel=1e-14
        )

    def test_mu_total(self):
        problem = random_problem("sql2", seed=22)
        assert problem.mu_total == problem.mu_f + problem.mu_psi
        assert problem.mu_psi > 0
