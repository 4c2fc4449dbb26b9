"""Shared problem factories for the test suite."""

import numpy as np
import pytest

from blockcoord.blocks import BlockPartition
from blockcoord.oracles import (
    BoxIndicator,
    L1Reg,
    ProblemInstance,
    QuadraticOracle,
    SquaredL2Reg,
    ZeroReg,
)


def random_partition(rng, max_blocks=20, max_size=8, total_cap=100):
    n = int(rng.integers(1, max_blocks + 1))
    sizes = []
    for _ in range(n):
        sizes.append(int(rng.integers(1, max_size + 1)))
    while sum(sizes) > total_cap:
        sizes = sizes[:-1] or [1]
    return BlockPartition(tuple(sizes))


def random_psd(rng, N, rank=None, eig_min=0.05, eig_max=2.0):
    rank = rank or N
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    eigs = np.zeros(N)
    eigs[:rank] = np.geomspace(eig_min, eig_max, rank)
    return Q @ np.diag(eigs) @ Q.T


def random_problem(kind, seed, partition=None):
    """Deterministic random instance of one of the built-in families."""
    rng = np.random.default_rng(seed)
    part = partition or random_partition(rng)
    N = part.total_dim
    A = random_psd(rng, N)
    b = A @ rng.standard_normal(N) + 0.1 * rng.standard_normal(N)
    smooth = QuadraticOracle(part, A, b)
    if kind == "quadratic":
        reg = ZeroReg(part)
        x0 = rng.standard_normal(N)
    elif kind == "lasso":
        reg = L1Reg(part, rng.uniform(0.05, 0.5, N))
        x0 = rng.standard_normal(N)
    elif kind == "box":
        lo = rng.uniform(-2.0, -0.5, N)
        hi = rng.uniform(0.5, 2.0, N)
        reg = BoxIndicator(part, lo, hi)
        x0 = rng.uniform(lo, hi)
    elif kind == "sql2":
        reg = SquaredL2Reg(part, rng.uniform(0.01, 0.1, part.n) * smooth.lipschitz().per_block)
        x0 = rng.standard_normal(N)
    else:
        raise ValueError(kind)
    return ProblemInstance(smooth, reg, x0, name=f"{kind}-{seed}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
