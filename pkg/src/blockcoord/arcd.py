"""Accelerated randomized coordinate descent for smooth unconstrained problems.

Two equivalent parameterizations are provided.  The gamma form carries a
scalar couple (gamma_k, alpha_k) with

    alpha_k^2 = (1 - alpha_k/n) gamma_k + (alpha_k/n) mu = gamma_{k+1},

an extrapolation point y^k that is a convex combination of x^k and a
momentum point v^k, a single-block gradient step on y^k, and a momentum
update.  The simple form replaces the scalar couple by (theta_k, beta_k)
derived from the same alpha recursion started at alpha_{-1}; with
alpha_{-1}^2 = gamma_0 and the same block draws, the two produce identical
iterates.  The gamma form is authoritative at the degenerate boundary
n = 1, mu = 1, where theta is taken as its limit value 1.

The solver also optionally tracks the scalar minimum phistar_k, the
centers v^k, and the weights lambda_k of a sequence of random quadratics
phi_k(x) = phistar_k + (gamma_k/2) ||x - v^k||_L^2 built alongside the
run; `estimate_sequence_check` replays their defining recursion at probe
points to certify the canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracles import NumericalError, ProblemFormatError, ProblemInstance
from .rbcd import RunTrace, SolverConfig, _TraceRecorder
from .rng import Xoshiro256StarStar


def solve_alpha(gamma: float, mu: float, n: int) -> float:
    """Positive root in (0, n] of alpha^2 = (1 - alpha/n) gamma + (alpha/n) mu.

    Evaluated in the cancellation-free form when (gamma - mu)/n >= 0.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    p = (gamma - mu) / n
    if p >= 0:
        alpha = 2.0 * gamma / (p + np.sqrt(p * p + 4.0 * gamma))
    else:
        alpha = 0.5 * (-p + np.sqrt(p * p + 4.0 * gamma))
    return min(float(alpha), float(n))


def alpha_schedule(gamma0: float, mu: float, n: int, k_max: int):
    """Deterministic (alphas, gammas, lambdas) arrays for k_max iterations.

    The schedule does not depend on the block draws, so it can be computed
    once and shared across runs: gammas has length k_max+1 with
    gammas[0] = gamma0, lambdas has length k_max+1 with lambdas[0] = 1.
    """
    alphas = np.empty(k_max)
    gammas = np.empty(k_max + 1)
    lambdas = np.empty(k_max + 1)
    gammas[0] = gamma0
    lambdas[0] = 1.0
    for k in range(k_max):
        a = solve_alpha(gammas[k], mu, n)
        alphas[k] = a
        gammas[k + 1] = (1.0 - a / n) * gammas[k] + (a / n) * mu
        lambdas[k + 1] = (1.0 - a / n) * lambdas[k]
    return alphas, gammas, lambdas


@dataclass
class EstimateSeqState:
    """Scalar state of the tracked quadratic at one iteration."""

    gamma: float
    v: np.ndarray
    phistar: float
    lam: float


@dataclass
class EstimateSeqTrace:
    """Per-iteration quantities needed to replay the quadratic recursion."""

    mu: float
    gamma0: float
    alphas: np.ndarray        # length k_max
    gammas: np.ndarray        # length k_max + 1
    lambdas: np.ndarray       # length k_max + 1
    phistars: np.ndarray      # length k_max + 1
    v_hist: np.ndarray        # (k_max + 1, N)
    y_hist: np.ndarray        # (k_max, N)
    fy: np.ndarray            # f(y^k), length k_max
    blocks: np.ndarray        # chosen block per iteration
    grad_blocks: list[np.ndarray]
    fx: np.ndarray            # f(x^k), length k_max + 1

    @property
    def iters(self) -> int:
        return len(self.alphas)

    def state_at(self, k: int) -> EstimateSeqState:
        return EstimateSeqState(
            gamma=float(self.gammas[k]),
            v=self.v_hist[k],
            phistar=float(self.phistars[k]),
            lam=float(self.lambdas[k]),
        )


def _require_smooth(problem: ProblemInstance):
    if not problem.is_smooth_unconstrained():
        raise ProblemFormatError(
            "arcd applies to unconstrained smooth minimization only "
            "(the regularizer must be zero)"
        )


def _resolve_mu(problem: ProblemInstance, mu: float | None) -> float:
    value = problem.mu_f if mu is None else float(mu)
    if not 0.0 <= value <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    return value


def arcd_run_gamma(
    problem: ProblemInstance,
    config: SolverConfig,
    gamma0: float = 1.0,
    mu: float | None = None,
    track_es: bool = False,
    schedule=None,
) -> tuple[RunTrace, EstimateSeqTrace | None]:
    """Run the gamma-form method; optionally track the quadratic sequence."""
    _require_smooth(problem)
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    mu = _resolve_mu(problem, mu)
    part = problem.partition
    n = part.n
    offsets = part.offsets
    L = problem.weights.per_block
    smooth = problem.smooth
    k_max = config.max_iters
    if schedule is None:
        schedule = alpha_schedule(gamma0, mu, n, k_max)
    alphas, gammas, lambdas = schedule
    if len(alphas) < k_max:
        raise ValueError("schedule shorter than max_iters")

    rng = Xoshiro256StarStar(config.seed)
    rec = _TraceRecorder("arcd", config.seed, config.record_gdual, config.record_points)
    x = problem.x0.copy()
    v = x.copy()

    es = None
    if track_es:
        N = part.total_dim
        es = EstimateSeqTrace(
            mu=mu,
            gamma0=gamma0,
            alphas=np.asarray(alphas[:k_max], dtype=float),
            gammas=np.asarray(gammas[: k_max + 1], dtype=float),
            lambdas=np.asarray(lambdas[: k_max + 1], dtype=float),
            phistars=np.empty(k_max + 1),
            v_hist=np.empty((k_max + 1, N)),
            y_hist=np.empty((k_max, N)),
            fy=np.empty(k_max),
            blocks=np.empty(k_max, dtype=np.int64),
            grad_blocks=[],
            fx=np.empty(k_max + 1),
        )
        es.phistars[0] = smooth.eval(v)
        es.v_hist[0] = v
        es.fx[0] = smooth.eval(x)
    per_coord = problem.weights.per_coord

    rec.record(problem, 0, x, -1)
    ex_alpha = [np.nan]
    ex_gamma = [gammas[0]]
    ex_lambda = [1.0]
    ex_phistar = [es.phistars[0] if track_es else np.nan]

    last_block = -1

    def _record(k, block):
        rec.record(problem, k, x, block)
        ex_alpha.append(alphas[k - 1])
        ex_gamma.append(gammas[k])
        ex_lambda.append(lambdas[k])
        ex_phistar.append(es.phistars[k] if track_es else np.nan)

    for k in range(k_max):
        a = alphas[k]
        gk = gammas[k]
        gk1 = gammas[k + 1]
        agn = a * gk / n
        y = (agn * v + gk1 * x) / (agn + gk1)
        i = rng.uniform_index(n)
        lo, hi = offsets[i], offsets[i + 1]
        gi = smooth.partial_grad(y, i)
        if not np.all(np.isfinite(gi)):
            raise NumericalError(f"non-finite gradient at iteration {k} (block {i})")

        if track_es:
            fy = smooth.eval(y)
            diff = y - v
            dist_sq = float(np.dot(per_coord * diff, diff))
            es.phistars[k + 1] = (
                (1.0 - a / n) * es.phistars[k]
                + (a / n) * fy
                - (a * a / (2.0 * gk1 * L[i])) * float(np.dot(gi, gi))
                + (a * (1.0 - a / n) * gk / gk1)
                * (mu / (2.0 * n) * dist_sq + float(np.dot(gi, v[lo:hi] - y[lo:hi])))
            )
            es.y_hist[k] = y
            es.fy[k] = fy
            es.blocks[k] = i
            es.grad_blocks.append(gi.copy())

        x = y.copy()
        x[lo:hi] -= gi / L[i]
        v = ((1.0 - a / n) * gk * v + (a / n) * mu * y) / gk1
        v[lo:hi] -= (a / (L[i] * gk1)) * gi
        last_block = i

        if track_es:
            es.v_hist[k + 1] = v
            es.fx[k + 1] = smooth.eval(x)
        if (k + 1) % config.record_every == 0:
            _record(k + 1, i)

    if k_max % config.record_every != 0:
        _record(k_max, last_block)
    trace = rec.finish(x)
    trace.extras = {
        "alpha": np.array(ex_alpha),
        "gamma": np.array(ex_gamma),
        "lambda": np.array(ex_lambda),
    }
    if track_es:
        trace.extras["phistar"] = np.array(ex_phistar)
    return trace, es


def theta_beta(alpha: float, mu: float, n: int) -> tuple[float, float]:
    """Extrapolation and momentum coefficients of the simple form.

    theta = (n alpha - mu)/(n^2 - mu) and beta = 1 - mu/(n alpha); at the
    degenerate boundary n = 1, mu = 1 theta is the continuity limit 1.
    """
    denom = n * n - mu
    theta = 1.0 if denom == 0.0 else (n * alpha - mu) / denom
    beta = 1.0 - mu / (n * alpha)
    return theta, beta


def arcd_run_simple(
    problem: ProblemInstance,
    config: SolverConfig,
    alpha_prev: float = 1.0,
    mu: float | None = None,
) -> RunTrace:
    """Run the (theta, beta) form started from alpha_{-1} = alpha_prev."""
    _require_smooth(problem)
    mu = _resolve_mu(problem, mu)
    part = problem.partition
    n = part.n
    if not 0.0 < alpha_prev <= n:
        raise ValueError("alpha_prev must lie in (0, n]")
    offsets = part.offsets
    L = problem.weights.per_block
    smooth = problem.smooth
    rng = Xoshiro256StarStar(config.seed)
    rec = _TraceRecorder(
        "arcd-simple", config.seed, config.record_gdual, config.record_points
    )
    x = problem.x0.copy()
    v = x.copy()
    rec.record(problem, 0, x, -1)

    alpha = alpha_prev
    last_block = -1
    for k in range(config.max_iters):
        alpha = solve_alpha(alpha * alpha, mu, n)
        theta, beta = theta_beta(alpha, mu, n)
        y = theta * v + (1.0 - theta) * x
        i = rng.uniform_index(n)
        lo, hi = offsets[i], offsets[i + 1]
        gi = smooth.partial_grad(y, i)
        if not np.all(np.isfinite(gi)):
            raise NumericalError(f"non-finite gradient at iteration {k} (block {i})")
        x = y.copy()
        x[lo:hi] -= gi / L[i]
        v = beta * v + (1.0 - beta) * y
        v[lo:hi] -= gi / (alpha * L[i])
        last_block = i
        if (k + 1) % config.record_every == 0:
            rec.record(problem, k + 1, x, i)

    if config.max_iters % config.record_every != 0:
        rec.record(problem, config.max_iters, x, last_block)
    return rec.finish(x)


@dataclass
class EsCheckReport:
    """Outcome of replaying the quadratic recursion at probe points."""

    probes: int
    iters: int
    tol: float
    max_rel_err: float
    first_bad_k: int | None
    lambda_replay_max_err: float
    lambda_hit_zero: bool
    ok: bool

    def to_dict(self) -> dict:
        return {
            "probes": self.probes,
            "iters": self.iters,
            "tol": self.tol,
            "max_rel_err": self.max_rel_err,
            "first_bad_k": self.first_bad_k,
            "lambda_replay_max_err": self.lambda_replay_max_err,
            "lambda_hit_zero": self.lambda_hit_zero,
            "ok": self.ok,
        }


def estimate_sequence_check(
    problem: ProblemInstance,
    es: EstimateSeqTrace,
    probes: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
) -> EsCheckReport:
    """Compare the canonical quadratic against its unrolled recursion.

    At each probe point x the recursion

        phi_{k+1}(x) = (1 - a_k/n) phi_k(x)
                       + a_k ( f(y^k)/n + <g_k, x_{i_k} - y^k_{i_k}>
                               + mu/(2n) ||x - y^k||_L^2 )

    is accumulated along the realized block sequence and checked against
    phistar_k + (gamma_k/2)||x - v^k||_L^2 for every k.
    """
    part = problem.partition
    n = part.n
    w = problem.weights.per_coord
    N = part.total_dim
    rng = np.random.default_rng(seed)
    scale = 1.0 + float(np.linalg.norm(problem.x0))
    pts = problem.x0[None, :] + scale * rng.standard_normal((probes, N))

    max_rel = 0.0
    first_bad = None
    for x in pts:
        diff0 = x - es.v_hist[0]
        phi = es.phistars[0] + 0.5 * es.gammas[0] * float(np.dot(w * diff0, diff0))
        for k in range(es.iters + 1):
            dv = x - es.v_hist[k]
            canonical = es.phistars[k] + 0.5 * es.gammas[k] * float(
                np.dot(w * dv, dv)
            )
            rel = abs(phi - canonical) / max(1.0, abs(phi), abs(canonical))
            if rel > max_rel:
                max_rel = rel
            if rel > tol and first_bad is None:
                first_bad = k
            if k == es.iters:
                break
            a = es.alphas[k]
            i = int(es.blocks[k])
            sl = part.block_slice(i)
            y = es.y_hist[k]
            dy = x - y
            phi = (1.0 - a / n) * phi + a * (
                es.fy[k] / n
                + float(np.dot(es.grad_blocks[k], x[sl] - y[sl]))
                + es.mu / (2.0 * n) * float(np.dot(w * dy, dy))
            )

    lam_replay = np.cumprod(np.concatenate(([1.0], 1.0 - es.alphas / n)))
    lam_err = float(np.max(np.abs(lam_replay - es.lambdas)))
    return EsCheckReport(
        probes=probes,
        iters=es.iters,
        tol=tol,
        max_rel_err=max_rel,
        first_bad_k=first_bad,
        lambda_replay_max_err=lam_err,
        lambda_hit_zero=bool(np.any(es.lambdas == 0.0)),
        ok=first_bad is None and lam_err <= 1e-12,
    )
