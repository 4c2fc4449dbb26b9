#!/usr/bin/env python3
"""Regenerate the bundled problem fixtures (deterministic).

Each fixture targets a specific certification regime:
  lasso-20d          least-squares + l1, rank-deficient design (mu_f = 0)
  box-qp-10d         strictly convex quadratic over a box
  strongly-convex-50d  rank-deficient quadratic + squared-l2 (mu from Psi)
  smooth-qp-100d     strictly convex smooth quadratic, small computed mu

The strong-convexity moduli are kept small on purpose: geometric bounds
evaluated out to a few thousand iterations must stay well above the
floating-point noise floor of the gap measurements.

Run:  python3 scripts/make_problems.py [outdir]
"""

import json
import sys
from pathlib import Path

import numpy as np

from blockcoord.blocks import BlockPartition
from blockcoord.oracles import (
    L1Reg,
    LeastSquaresOracle,
    ProblemInstance,
    QuadraticOracle,
    SquaredL2Reg,
    quadratic_mu,
)
from blockcoord.harness import estimate_rbar0, reference_solve
from blockcoord.io import problem_to_dict

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "blockcoord" / "data"


def _describe(problem):
    ref = reference_solve(problem)
    delta0 = problem.F(problem.x0) - ref.F_star
    rbar = estimate_rbar0(problem, ref, samples=200, seed=11)
    print(
        f"  {problem.name}: N={problem.dim} n={problem.n} "
        f"mu_f={problem.mu_f:.4g} mu_psi={problem.mu_psi:.4g} "
        f"F*={ref.F_star:.6g} delta0={delta0:.6g} R0={ref.R0:.6g} "
        f"Rbar=({rbar.lower}, {rbar.upper})"
    )
    return ref, delta0


def make_lasso_20d():
    rng = np.random.default_rng(20250601)
    part = BlockPartition((2,) * 10)
    m, N = 15, 20
    M = rng.standard_normal((m, N)) / np.sqrt(m)
    x_true = np.zeros(N)
    support = rng.choice(N, size=4, replace=False)
    x_true[support] = rng.standard_normal(4) * 3.0
    y = M @ x_true + 0.1 * rng.standard_normal(m)
    lam_max = np.max(np.abs(M.T @ y))
    smooth = LeastSquaresOracle(part, M, y)
    reg = L1Reg(part, np.full(N, 0.3 * lam_max))
    return ProblemInstance(smooth, reg, np.zeros(N), name="lasso-20d")


def make_box_qp_10d():
    rng = np.random.default_rng(20250602)
    part = BlockPartition((2,) * 5)
    N = 10
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    eigs = np.geomspace(0.3, 2.5, N)
    A = Q @ np.diag(eigs) @ Q.T
    # pull the unconstrained optimum outside the box so faces are active
    b = A @ (3.0 * rng.standard_normal(N))
    smooth = QuadraticOracle(part, A, b)
    from blockcoord.oracles import BoxIndicator

    reg = BoxIndicator(part, np.full(N, -1.0), np.full(N, 1.0))
    return ProblemInstance(smooth, reg, np.zeros(N), name="box-qp-10d")


def make_strongly_convex_50d():
    rng = np.random.default_rng(20250603)
    part = BlockPartition((5,) * 10)
    N, rank = 50, 30
    G = rng.standard_normal((N, rank)) / np.sqrt(rank)
    A = G @ G.T
    b = A @ rng.standard_normal(N) + 0.05 * rng.standard_normal(N)
    smooth = QuadraticOracle(part, A, b)
    # sigma_i proportional to L_i makes the Psi modulus exactly 0.02
    sigmas = 0.02 * smooth.lipschitz().per_block
    reg = SquaredL2Reg(part, sigmas)
    x0 = 2.0 * rng.standard_normal(N)
    return ProblemInstance(smooth, reg, x0, name="strongly-convex-50d")


def make_smooth_qp_100d(mu_target=5e-3):
    rng = np.random.default_rng(20250604)
    part = BlockPartition((10,) * 10)
    N = 100
    G = rng.standard_normal((N, N)) / np.sqrt(N)
    B = G @ G.T
    B /= np.linalg.eigvalsh(B)[-1]
    x_center = rng.standard_normal(N)
    x0 = x_center + 2.0 * rng.standard_normal(N)

    def build(t):
        A = B + t * np.eye(N)
        smooth = QuadraticOracle(part, A, A @ x_center)
        return smooth

    lo, hi = 0.0, 1.0
    for _ in range(60):
        t = 0.5 * (lo + hi)
        mu = quadratic_mu(build(t).A, build(t).lipschitz())
        if mu < mu_target:
            lo = t
        else:
            hi = t
    smooth = build(hi)
    from blockcoord.oracles import ZeroReg

    return ProblemInstance(smooth, ZeroReg(part), x0, name="smooth-qp-100d")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else OUT_DIR
    outdir.mkdir(parents=True, exist_ok=True)
    for builder in (
        make_lasso_20d,
        make_box_qp_10d,
        make_strongly_convex_50d,
        make_smooth_qp_100d,
    ):
        problem = builder()
        path = outdir / f"{problem.name}.json"
        with open(path, "w") as fh:
            json.dump(problem_to_dict(problem), fh)
            fh.write("\n")
        print(f"wrote {path}")
        _describe(problem)


if __name__ == "__main__":
    main()
