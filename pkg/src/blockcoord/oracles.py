"""Smooth objectives and block-separable regularizers.

The composite objective is F(x) = f(x) + Psi(x) where f is convex and
differentiable with block-wise Lipschitz partial gradients (constants L_i)
and Psi(x) = sum_i Psi_i(x_i) is closed convex, possibly +inf valued.

A smooth oracle exposes value, per-block partial gradients, the constants
L_i, and its strong-convexity modulus measured in the L-weighted norm.
A regularizer exposes separable values and closed-form solutions of the
block subproblem

    min_d  <q, d> + (L_i/2)||d||^2 + Psi_i(x_i + d)

given q = grad_i f(x).  All built-in subproblems are solved exactly.
"""

from __future__ import annotations

import numpy as np

from .blocks import BlockPartition, LWeights

MU_EIGENSOLVE_DIM_CAP = 512


class ProblemFormatError(ValueError):
    """Raised when a problem description violates the input contract."""


class NumericalError(RuntimeError):
    """Raised when an iteration produces non-finite values."""


def _check_symmetric(A: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    if float(np.max(np.abs(A - A.T))) > 1e-12 * scale:
        raise ProblemFormatError("matrix must be symmetric to 1e-12")


def _block_spectral_norm(block: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric PSD block.

    Exact symmetric eigensolve up to dimension 64; power iteration with a
    1e-10 relative Rayleigh-quotient tolerance beyond that.
    """
    m = block.shape[0]
    if m == 1:
        return float(block[0, 0])
    if m <= 64:
        return float(np.linalg.eigvalsh(block)[-1])
    v = np.linspace(1.0, 2.0, m)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(100000):
        w = block @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam_new = float(v @ (block @ v))
        if abs(lam_new - lam) <= 1e-10 * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    return lam


def quadratic_mu(A: np.ndarray, w: LWeights) -> float:
    """Strong-convexity modulus of x -> x'Ax/2 relative to the weighted norm.

    Equals the smallest eigenvalue of D^{-1/2} A D^{-1/2} with
    D = blockdiag(L_i I), clamped to [0, 1].  Requires a dense symmetric
    eigensolve and is therefore capped at dimension 512.
    """
    A = np.asarray(A, dtype=float)
    _check_symmetric(A)
    N = A.shape[0]
    if N != w.partition.total_dim:
        raise ProblemFormatError("matrix dimension does not match partition")
    if N > MU_EIGENSOLVE_DIM_CAP:
        raise ProblemFormatError(
            f"convexity-parameter eigensolve capped at N={MU_EIGENSOLVE_DIM_CAP}, got {N}"
        )
    inv_sqrt = 1.0 / np.sqrt(w.per_coord)
    scaled = A * inv_sqrt[:, None] * inv_sqrt[None, :]
    lam_min = float(np.linalg.eigvalsh(scaled)[0])
    return min(1.0, max(0.0, lam_min))


def soft_threshold_block(z: np.ndarray, lam: np.ndarray, step: float) -> np.ndarray:
    """Coordinate-wise shrinkage sign(z) * max(|z| - lam/step, 0).

    Minimizes (step/2)||u - z||^2 + sum_j lam_j |u_j| over u; with lam = 0 it
    reduces to the plain gradient-step point z.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    return np.sign(z) * np.maximum(np.abs(z) - lam / step, 0.0)


class SmoothOracle:
    """Value / partial-gradient / Lipschitz interface for the smooth part."""

    partition: BlockPartition

    def eval(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def partial_grad(self, x: np.ndarray, i: int) -> np.ndarray:
        raise NotImplementedError

    def full_grad(self, x: np.ndarray) -> np.ndarray:
        """Assembled blockwise from partial_grad, so the two agree exactly."""
        return np.concatenate(
            [self.partial_grad(x, i) for i in range(self.partition.n)]
        )

    def lipschitz(self) -> LWeights:
        raise NotImplementedError

    def mu_f(self) -> float:
        raise NotImplementedError


class QuadraticOracle(SmoothOracle):
    """f(x) = x'Ax/2 - b'x + const with A symmetric positive semidefinite.

    L_i is the spectral norm of the diagonal block A_ii, which is tight for
    the blockwise descent inequality.
    """

    def __init__(self, partition: BlockPartition, A, b, constant: float = 0.0):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        N = partition.total_dim
        if A.shape != (N, N):
            raise ProblemFormatError(f"A must be {N}x{N}, got {A.shape}")
        if b.shape != (N,):
            raise ProblemFormatError(f"b must have length {N}, got {b.shape}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ProblemFormatError("A and b must be finite")
        _check_symmetric(A)
        self.partition = partition
        self.A = 0.5 * (A + A.T)
        self.b = b
        self.constant = float(constant)
        L = np.empty(partition.n)
        for i in range(partition.n):
            sl = partition.block_slice(i)
            L[i] = _block_spectral_norm(self.A[sl, sl])
        if np.any(L <= 0):
            raise ProblemFormatError("every diagonal block of A must be nonzero")
        self._weights = LWeights(partition, L)
        # row blocks pre-sliced: partial gradients sit on the solver hot path
        self._A_rows = [self.A[partition.block_slice(i)] for i in range(partition.n)]
        self._b_blocks = [self.b[partition.block_slice(i)] for i in range(partition.n)]
        self._mu: float | None = None

    def eval(self, x: np.ndarray) -> float:
        return float(0.5 * np.dot(x, self.A @ x) - np.dot(self.b, x) + self.constant)

    def partial_grad(self, x: np.ndarray, i: int) -> np.ndarray:
        return self._A_rows[i] @ x - self._b_blocks[i]

    def lipschitz(self) -> LWeights:
        return self._weights

    def mu_f(self) -> float:
        if self._mu is None:
            self._mu = quadratic_mu(self.A, self._weights)
        return self._mu


class LeastSquaresOracle(QuadraticOracle):
    """f(x) = ||Mx - y||^2 / 2, reduced internally to quadratic form.

    A = M'M, b = M'y, constant = ||y||^2 / 2, so eval matches the residual
    form exactly and L_i = ||M_(:,block i)||_2^2.
    """

    def __init__(self, partition: BlockPartition, M, y):
        M = np.array(M, dtype=float)
        y = np.array(y, dtype=float)
        if M.ndim != 2 or M.shape[1] != partition.total_dim:
            raise ProblemFormatError(
                f"design matrix must have {partition.total_dim} columns, got {M.shape}"
            )
        if y.shape != (M.shape[0],):
            raise ProblemFormatError("target length must match design rows")
        super().__init__(
            partition, M.T @ M, M.T @ y, constant=0.5 * float(np.dot(y, y))
        )
        self.design = M
        self.targets = y


class Regularizer:
    """Block-separable closed convex Psi with exact block prox solves."""

    partition: BlockPartition

    def eval_block(self, i: int, xi: np.ndarray) -> float:
        raise NotImplementedError

    def eval(self, x: np.ndarray) -> float:
        self.partition.check_vector(x)
        total = 0.0
        for i in range(self.partition.n):
            total += self.eval_block(i, x[self.partition.block_slice(i)])
        return total

    def prox_block(
        self, i: int, grad_i: np.ndarray, xi: np.ndarray, li: float
    ) -> np.ndarray:
        """Minimizer d of <grad_i, d> + (li/2)||d||^2 + Psi_i(xi + d)."""
        raise NotImplementedError

    def mu_psi(self, w: LWeights) -> float:
        """Convexity modulus of Psi relative to the weighted norm."""
        return 0.0


class ZeroReg(Regularizer):
    """Psi = 0; the prox is the plain gradient step."""

    def __init__(self, partition: BlockPartition):
        self.partition = partition

    def eval_block(self, i, xi):
        return 0.0

    def eval(self, x):
        self.partition.check_vector(x)
        return 0.0

    def prox_block(self, i, grad_i, xi, li):
        return -grad_i / li


class L1Reg(Regularizer):
    """Psi(x) = sum_j lam_j |x_j| with nonnegative per-coordinate weights."""

    def __init__(self, partition: BlockPartition, weights):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim == 0:
            weights = np.full(partition.total_dim, float(weights))
        if weights.shape != (partition.total_dim,):
            raise ProblemFormatError("need one l1 weight per coordinate")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ProblemFormatError("l1 weights must be finite and >= 0")
        self.partition = partition
        self.weights = weights
        self._w_blocks = [
            weights[partition.block_slice(i)] for i in range(partition.n)
        ]

    def eval_block(self, i, xi):
        return float(np.dot(self._w_blocks[i], np.abs(xi)))

    def eval(self, x):
        self.partition.check_vector(x)
        return float(np.dot(self.weights, np.abs(x)))

    def prox_block(self, i, grad_i, xi, li):
        u = soft_threshold_block(xi - grad_i / li, self._w_blocks[i], li)
        return u - xi


class BoxIndicator(Regularizer):
    """Indicator of the box [lower, upper]; prox is gradient step + clip."""

    def __init__(self, partition: BlockPartition, lower, upper):
        N = partition.total_dim
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.ndim == 0:
            lower = np.full(N, float(lower))
        if upper.ndim == 0:
            upper = np.full(N, float(upper))
        if lower.shape != (N,) or upper.shape != (N,):
            raise ProblemFormatError("box bounds must have one entry per coordinate")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ProblemFormatError("box bounds must not be NaN")
        if np.any(lower > upper):
            raise ProblemFormatError("box requires lower <= upper")
        self.partition = partition
        self.lower = lower
        self.upper = upper
        # feasibility slack at machine-precision scale: applying a clipped
        # prox step as x + (u - x) can land 1 ulp outside the box
        self._lo_slack = np.where(np.isfinite(lower), 1e-12 * (1.0 + np.abs(lower)), 0.0)
        self._hi_slack = np.where(np.isfinite(upper), 1e-12 * (1.0 + np.abs(upper)), 0.0)
        self._lo_blocks = [lower[partition.block_slice(i)] for i in range(partition.n)]
        self._hi_blocks = [upper[partition.block_slice(i)] for i in range(partition.n)]

    def eval_block(self, i, xi):
        sl = self.partition.block_slice(i)
        if np.any(xi < self._lo_blocks[i] - self._lo_slack[sl]) or np.any(
            xi > self._hi_blocks[i] + self._hi_slack[sl]
        ):
            return np.inf
        return 0.0

    def eval(self, x):
        self.partition.check_vector(x)
        if np.any(x < self.lower - self._lo_slack) or np.any(
            x > self.upper + self._hi_slack
        ):
            return np.inf
        return 0.0

    def prox_block(self, i, grad_i, xi, li):
        u = np.clip(xi - grad_i / li, self._lo_blocks[i], self._hi_blocks[i])
        return u - xi


class SquaredL2Reg(Regularizer):
    """Psi_i(x_i) = (sigma_i/2)||x_i||^2 per block, sigma_i >= 0.

    Relative to the weighted norm this contributes mu_psi = min_i sigma_i/L_i,
    so the modulus is deliberately coupled to the smooth part's constants.
    """

    def __init__(self, partition: BlockPartition, sigmas):
        sigmas = np.asarray(sigmas, dtype=float)
        if sigmas.ndim == 0:
            sigmas = np.full(partition.n, float(sigmas))
        if sigmas.shape != (partition.n,):
            raise ProblemFormatError("need one sigma per block")
        if np.any(sigmas < 0) or not np.all(np.isfinite(sigmas)):
            raise ProblemFormatError("sigmas must be finite and >= 0")
        self.partition = partition
        self.sigmas = sigmas

    def eval_block(self, i, xi):
        return 0.5 * self.sigmas[i] * float(np.dot(xi, xi))

    def prox_block(self, i, grad_i, xi, li):
        s = self.sigmas[i]
        return -(grad_i + s * xi) / (li + s)

    def mu_psi(self, w):
        return float(np.min(self.sigmas / w.per_block))


class ProblemInstance:
    """Composite problem: smooth oracle + regularizer + start point.

    The start point must be feasible (F(x0) finite); infeasible starts are
    rejected at load time.
    """

    def __init__(
        self,
        smooth: SmoothOracle,
        regularizer: Regularizer,
        x0,
        name: str = "problem",
    ):
        if smooth.partition is not regularizer.partition and (
            smooth.partition.sizes != regularizer.partition.sizes
        ):
            raise ProblemFormatError("smooth and regularizer partitions differ")
        self.partition = smooth.partition
        self.smooth = smooth
        self.regularizer = regularizer
        self.weights = smooth.lipschitz()
        self.name = name
        x0 = np.array(x0, dtype=float)
        try:
            self.partition.check_vector(x0)
        except ValueError as exc:
            raise ProblemFormatError(str(exc)) from exc
        if not np.all(np.isfinite(x0)):
            raise ProblemFormatError("x0 must be finite")
        self.x0 = x0
        if not np.isfinite(self.F(x0)):
            raise ProblemFormatError("F(x0) must be finite (x0 feasible)")

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def dim(self) -> int:
        return self.partition.total_dim

    def F(self, x: np.ndarray) -> float:
        return self.smooth.eval(x) + self.regularizer.eval(x)

    @property
    def mu_f(self) -> float:
        return self.smooth.mu_f()

    @property
    def mu_psi(self) -> float:
        return self.regularizer.mu_psi(self.weights)

    @property
    def mu_total(self) -> float:
        return self.mu_f + self.mu_psi

    def is_smooth_unconstrained(self) -> bool:
        return isinstance(self.regularizer, ZeroReg)
