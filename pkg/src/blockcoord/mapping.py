"""Block proximal steps and the composite gradient mapping.

For each block the update direction is

    d_i(x) = argmin_d  <grad_i f(x), d> + (L_i/2)||d||^2 + Psi_i(x_i + d)

and the blockwise composite gradient mapping is g_i(x) = -L_i d_i(x).
The full mapping g(x) vanishes exactly at minimizers of F, and its dual
weighted norm serves as the stationarity residual.  The quadratic model

    H(x, d) = f(x) + <grad f(x), d> + ||d||_L^2 / 2 + Psi(x + d)

is minimized over d by the assembled direction d(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import NumericalError, ProblemInstance


@dataclass
class MappingResult:
    """Full update direction, gradient mapping, and model value at one point."""

    d: np.ndarray
    g: np.ndarray
    g_dual_norm: float
    h_value: float


def block_prox_step(problem: ProblemInstance, x: np.ndarray, i: int) -> np.ndarray:
    """Solve the block-i proximal subproblem at x."""
    grad_i = problem.smooth.partial_grad(x, i)
    if not np.all(np.isfinite(grad_i)):
        raise NumericalError(f"non-finite partial gradient at block {i}")
    sl = problem.partition.block_slice(i)
    return problem.regularizer.prox_block(
        i, grad_i, x[sl], problem.weights.per_block[i]
    )


def full_mapping(problem: ProblemInstance, x: np.ndarray) -> MappingResult:
    """Assemble d(x), g(x) = -L d(x) blockwise, the dual residual, and H(x, d(x))."""
    part = problem.partition
    L = problem.weights.per_block
    d = np.empty(part.total_dim)
    grad = np.empty(part.total_dim)
    for i in range(part.n):
        gi = problem.smooth.partial_grad(x, i)
        if not np.all(np.isfinite(gi)):
            raise NumericalError(f"non-finite partial gradient at block {i}")
        sl = part.block_slice(i)
        grad[sl] = gi
        d[sl] = problem.regularizer.prox_block(i, gi, x[sl], L[i])
    g = -problem.weights.per_coord * d
    dual_sq = float(np.dot(g / problem.weights.per_coord, g))
    h = (
        problem.smooth.eval(x)
        + float(np.dot(grad, d))
        + 0.5 * float(np.dot(problem.weights.per_coord * d, d))
        + problem.regularizer.eval(x + d)
    )
    return MappingResult(d=d, g=g, g_dual_norm=float(np.sqrt(dual_sq)), h_value=h)


def surrogate_h(problem: ProblemInstance, x: np.ndarray, d: np.ndarray) -> float:
    """Quadratic model value H(x, d); +inf when x + d leaves the domain of Psi."""
    part = problem.partition
    part.check_vector(d)
    grad = problem.smooth.full_grad(x)
    return (
        problem.smooth.eval(x)
        + float(np.dot(grad, d))
        + 0.5 * float(np.dot(problem.weights.per_coord * d, d))
        + problem.regularizer.eval(x + d)
    )
