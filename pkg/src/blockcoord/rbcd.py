"""Randomized block-coordinate descent.

Each iteration draws one block index uniformly at random, solves that
block's proximal subproblem, and applies the update in place:

    x^{k+1} = x^k + U_{i_k} d_{i_k}(x^k).

Runs are deterministic functions of (problem, seed); see rng for the PRNG
contract.  Objective values are recomputed from scratch at record points
rather than updated incrementally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mapping import full_mapping
from .oracles import NumericalError, ProblemInstance
from .rng import Xoshiro256StarStar

_CSV_EXTRA_ORDER = ("alpha", "gamma", "lambda", "phistar")


class VerificationError(RuntimeError):
    """A per-step invariant asserted in verify mode failed."""


@dataclass
class SolverConfig:
    max_iters: int = 1000
    seed: int = 0
    record_every: int = 1
    verify_descent: bool = False
    record_gdual: bool = False
    record_points: bool = False

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class RunTrace:
    """Per-record-point history of one seeded run."""

    ks: np.ndarray
    F_values: np.ndarray
    blocks: np.ndarray  # block applied at step k-1; -1 for the k=0 row
    final_point: np.ndarray
    seed: int
    method: str
    gdual: np.ndarray | None = None
    points: np.ndarray | None = None
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self):
        return len(self.ks)

    def gaps(self, f_star: float) -> np.ndarray:
        return self.F_values - f_star

    def to_csv(self, path, f_star: float | None = None):
        cols = ["k", "F"]
        if f_star is not None:
            cols.append("gap")
        cols.append("block")
        if self.gdual is not None:
            cols.append("gdual")
        extra_names = [n for n in _CSV_EXTRA_ORDER if n in self.extras]
        cols.extend(extra_names)
        lines = [",".join(cols)]
        for j, k in enumerate(self.ks):
            row = [str(int(k)), f"{self.F_values[j]:.17g}"]
            if f_star is not None:
                row.append(f"{self.F_values[j] - f_star:.17g}")
            row.append("" if self.blocks[j] < 0 else str(int(self.blocks[j])))
            if self.gdual is not None:
                row.append(f"{self.gdual[j]:.17g}")
            for name in extra_names:
                row.append(f"{self.extras[name][j]:.17g}")
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


class _TraceRecorder:
    def __init__(self, method: str, seed: int, record_gdual: bool, record_points=False):
        self.method = method
        self.seed = seed
        self.record_gdual = record_gdual
        self.record_points = record_points
        self.ks: list[int] = []
        self.Fs: list[float] = []
        self.blocks: list[int] = []
        self.gduals: list[float] = []
        self.points: list[np.ndarray] = []

    def record(self, problem, k: int, x: np.ndarray, block: int):
        fval = problem.F(x)
        if not np.isfinite(fval):
            raise NumericalError(f"non-finite objective at iteration {k}")
        self.ks.append(k)
        self.Fs.append(fval)
        self.blocks.append(block)
        if self.record_gdual:
            self.gduals.append(full_mapping(problem, x).g_dual_norm)
        if self.record_points:
            self.points.append(x.copy())

    def finish(self, x: np.ndarray, extras: dict | None = None) -> RunTrace:
        return RunTrace(
            ks=np.array(self.ks, dtype=np.int64),
            F_values=np.array(self.Fs),
            blocks=np.array(self.blocks, dtype=np.int64),
            final_point=x.copy(),
            seed=self.seed,
            method=self.method,
            gdual=np.array(self.gduals) if self.record_gdual else None,
            points=np.vstack(self.points) if self.record_points else None,
            extras=extras or {},
        )


def rbcd_run(problem: ProblemInstance, config: SolverConfig) -> RunTrace:
    """Run RBCD for config.max_iters steps from problem.x0."""
    part = problem.partition
    n = part.n
    offsets = part.offsets
    L = problem.weights.per_block
    smooth = problem.smooth
    reg = problem.regularizer
    rng = Xoshiro256StarStar(config.seed)
    rec = _TraceRecorder("rbcd", config.seed, config.record_gdual, config.record_points)

    x = problem.x0.copy()
    rec.record(problem, 0, x, -1)
    mu_psi = problem.mu_psi if config.verify_descent else 0.0
    f_prev = problem.F(x) if config.verify_descent else 0.0

    last_block = -1
    for k in range(config.max_iters):
        i = rng.uniform_index(n)
        lo, hi = offsets[i], offsets[i + 1]
        grad_i = smooth.partial_grad(x, i)
        d_i = reg.prox_block(i, grad_i, x[lo:hi], L[i])
        x[lo:hi] += d_i
        last_block = i
        if config.verify_descent:
            f_new = problem.F(x)
            required = 0.5 * (1.0 + mu_psi) * L[i] * float(np.dot(d_i, d_i))
            if f_prev - f_new < required - 1e-10:
                raise VerificationError(
                    f"blockwise descent violated at iteration {k} (block {i}): "
                    f"drop {f_prev - f_new:.3e} < required {required:.3e}"
                )
            f_prev = f_new
        if (k + 1) % config.record_every == 0:
            rec.record(problem, k + 1, x, i)

    if config.max_iters % config.record_every != 0:
        rec.record(problem, config.max_iters, x, last_block)
    return rec.finish(x)


@dataclass
class MultiRunResult:
    """Independent restarts of one problem plus the pointwise best-of curve."""

    traces: list[RunTrace]
    ks: np.ndarray
    best_F: np.ndarray

    @property
    def runs(self) -> int:
        return len(self.traces)


def rbcd_multi_run(
    problem: ProblemInstance, config: SolverConfig, runs: int
) -> MultiRunResult:
    """Run RBCD `runs` times with seeds base, base+1, ... and aggregate."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    traces = []
    for j in range(runs):
        cfg = SolverConfig(
            max_iters=config.max_iters,
            seed=(config.seed + j) & 0xFFFFFFFFFFFFFFFF,
            record_every=config.record_every,
            verify_descent=config.verify_descent,
            record_gdual=config.record_gdual,
            record_points=config.record_points,
        )
        traces.append(rbcd_run(problem, cfg))
    stacked = np.vstack([t.F_values for t in traces])
    return MultiRunResult(
        traces=traces, ks=traces[0].ks.copy(), best_F=stacked.min(axis=0)
    )
