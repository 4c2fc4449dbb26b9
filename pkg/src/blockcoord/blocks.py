"""Block partition bookkeeping and the block-weighted norm pair.

A partition splits the N coordinates of a dense vector into n contiguous
blocks of sizes N_1..N_n.  Blocks are realized as index ranges (views onto
the underlying array), never as selection matrices.  Each block carries a
positive weight L_i; the induced primal norm is

    ||x||_L = (sum_i L_i ||x_i||^2)^(1/2)

and its dual reweights by 1/L_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BlockPartition:
    """Fixed decomposition of R^N into n contiguous blocks."""

    sizes: tuple[int, ...]
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.sizes) < 1:
            raise ValueError("partition needs at least one block")
        if any(int(s) < 1 for s in self.sizes):
            raise ValueError("every block size must be >= 1")
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        offsets = np.zeros(len(self.sizes) + 1, dtype=np.int64)
        np.cumsum(self.sizes, out=offsets[1:])
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def total_dim(self) -> int:
        return int(self.offsets[-1])

    def block_slice(self, i: int) -> slice:
        if not 0 <= i < self.n:
            raise IndexError(f"block index {i} out of range [0, {self.n})")
        return slice(int(self.offsets[i]), int(self.offsets[i + 1]))

    def block_view(self, x: np.ndarray, i: int) -> np.ndarray:
        """Read/write window onto block i of a length-N vector."""
        self.check_vector(x)
        return x[self.block_slice(i)]

    def check_vector(self, x: np.ndarray):
        if x.shape != (self.total_dim,):
            raise ValueError(
                f"vector of shape {x.shape} does not match partition dim {self.total_dim}"
            )

    @staticmethod
    def uniform(n: int, block_size: int = 1) -> "BlockPartition":
        return BlockPartition(tuple([block_size] * n))


@dataclass(frozen=True)
class LWeights:
    """One positive weight per block, expanded per coordinate for fast norms."""

    partition: BlockPartition
    per_block: np.ndarray
    per_coord: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L = np.asarray(self.per_block, dtype=float)
        if L.shape != (self.partition.n,):
            raise ValueError("need exactly one weight per block")
        if not np.all(np.isfinite(L)) or np.any(L <= 0):
            raise ValueError("block weights must be positive and finite")
        L = L.copy()
        L.setflags(write=False)
        per_coord = np.repeat(L, self.partition.sizes)
        per_coord.setflags(write=False)
        object.__setattr__(self, "per_block", L)
        object.__setattr__(self, "per_coord", per_coord)


def l_norm(x: np.ndarray, w: LWeights) -> float:
    """Weighted norm (sum_i L_i ||x_i||^2)^(1/2)."""
    w.partition.check_vector(x)
    return float(np.sqrt(np.dot(w.per_coord * x, x)))


def l_dual_norm(g: np.ndarray, w: LWeights) -> float:
    """Dual weighted norm (sum_i ||g_i||^2 / L_i)^(1/2)."""
    w.partition.check_vector(g)
    return float(np.sqrt(np.dot(g / w.per_coord, g)))
