"""Closed-form convergence bounds and iteration-complexity thresholds.

Evaluators for the expected-gap bounds of the randomized solvers, the
high-probability iteration thresholds for single- and multiple-run
strategies, and the corresponding prior bounds they are compared against.
All logarithms are natural.  Threshold evaluators return reals; callers
round up when budgeting iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arcd import alpha_schedule


@dataclass
class BoundInputs:
    """Scalar inputs shared by the bound evaluators.

    R0 is the weighted-norm distance from x0 to the optimal set, Rbar0 the
    largest weighted-norm distance from the initial level set to the
    optimal set, delta0 = F(x0) - Fstar, and c = max(Rbar0^2, delta0).
    c may be supplied directly instead of Rbar0.
    """

    n: int
    mu_f: float = 0.0
    mu_psi: float = 0.0
    R0: float = 0.0
    Rbar0: float | None = None
    delta0: float = 0.0
    gamma0: float = 1.0
    eps: float = 1e-3
    rho: float = 0.1
    c: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 <= self.mu_f <= 1.0:
            raise ValueError("mu_f must lie in [0, 1]")
        if self.mu_psi < 0.0:
            raise ValueError("mu_psi must be >= 0")
        if self.R0 < 0.0 or self.delta0 < 0.0:
            raise ValueError("R0 and delta0 must be >= 0")
        if self.gamma0 <= 0.0:
            raise ValueError("gamma0 must be positive")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if self.Rbar0 is not None and self.Rbar0 < self.R0 - 1e-12:
            raise ValueError("Rbar0 must be >= R0")
        if self.c is None and self.Rbar0 is not None:
            self.c = max(self.Rbar0**2, self.delta0)
        if self.c is not None and self.c < self.delta0 - 1e-12:
            raise ValueError("c must be >= delta0")

    def require_c(self) -> float:
        if self.c is None:
            raise ValueError("this bound needs c (supply Rbar0 or c)")
        return self.c

    def require_strong(self) -> float:
        mu = self.mu_f + self.mu_psi
        if mu <= 0.0:
            raise ValueError(
                "strong-convexity bound needs mu_f + mu_psi > 0; "
                "use the general bound otherwise"
            )
        return mu


def rbcd_bound_general(inputs: BoundInputs, k: int) -> float:
    """Expected-gap bound (n/(n+k)) (R0^2/2 + delta0)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return inputs.n / (inputs.n + k) * (0.5 * inputs.R0**2 + inputs.delta0)


def rbcd_strong_factor(inputs: BoundInputs) -> float:
    """Per-iteration contraction 1 - 2(mu_f+mu_psi) / (n (1+mu_f+2 mu_psi))."""
    inputs.require_strong()
    return 1.0 - 2.0 * (inputs.mu_f + inputs.mu_psi) / (
        inputs.n * (1.0 + inputs.mu_f + 2.0 * inputs.mu_psi)
    )


def rbcd_bound_strong(inputs: BoundInputs, k: int) -> float:
    """Geometric expected-gap bound under strong convexity."""
    if k < 0:
        raise ValueError("k must be >= 0")
    factor = rbcd_strong_factor(inputs)
    return factor**k * (0.5 * (1.0 + inputs.mu_psi) * inputs.R0**2 + inputs.delta0)


def rbcd_highprob_K(inputs: BoundInputs) -> float:
    """Single-run iteration threshold for P(gap <= eps) >= 1 - rho."""
    c = inputs.require_c()
    tau_num = inputs.R0**2 + 2.0 * inputs.delta0
    return (
        2.0 * inputs.n * c / inputs.eps * (1.0 + math.log(tau_num / (4.0 * c * inputs.rho)))
        + 2.0
        - inputs.n
    )


def rbcd_highprob_K_strong(inputs: BoundInputs) -> float:
    """Strongly convex single-run threshold."""
    mu = inputs.require_strong()
    lead = inputs.n * (1.0 + inputs.mu_f + 2.0 * inputs.mu_psi) / (2.0 * mu)
    numer = 0.5 * (1.0 + inputs.mu_psi) * inputs.R0**2 + inputs.delta0
    return lead * math.log(numer / (inputs.rho * inputs.eps))


def rbcd_multirun_K(inputs: BoundInputs) -> tuple[float, int, float]:
    """(K_underline, r, K_M) for the best-of-r restart strategy.

    K_underline iterations per run with r = ceil(log(1/rho)) independent
    runs give an eps-optimal best-of with probability >= 1 - rho; K_M bounds
    the total iteration count of the strategy.
    """
    r = math.ceil(math.log(1.0 / inputs.rho))
    base = 0.5 * inputs.R0**2 + inputs.delta0
    k_under = math.ceil(math.e * inputs.n / inputs.eps * base) - inputs.n
    k_multi = (
        math.ceil(2.0 * math.e * inputs.n / inputs.eps * (inputs.R0**2 + 2.0 * inputs.delta0))
        - inputs.n
    ) * r
    return float(k_under), int(r), float(k_multi)


def rt_bounds(inputs: BoundInputs, k: int) -> tuple[float, float, float, float]:
    """Prior-work comparison bounds (expected, K_bar, K_hat, K_bar_M).

    `expected` is the level-set-based expected-gap bound
    2 n c delta0 / (k delta0 + 2 n c); K_bar / K_hat are the matching
    single-run thresholds (K_hat is +inf without strong convexity);
    K_bar_M is the multiple-run total.
    """
    c = inputs.require_c()
    d0 = inputs.delta0
    expected = (
        2.0 * inputs.n * c * d0 / (k * d0 + 2.0 * inputs.n * c) if d0 > 0 else 0.0
    )
    if d0 <= 0:
        raise ValueError("rt thresholds need delta0 > 0")
    k_bar = (
        2.0 * inputs.n * c / inputs.eps * (1.0 + math.log(1.0 / inputs.rho))
        + 2.0
        - 2.0 * inputs.n * c / d0
    )
    mu = inputs.mu_f + inputs.mu_psi
    if mu > 0:
        k_hat = (
            inputs.n
            * (1.0 + inputs.mu_psi)
            / mu
            * math.log(d0 / (inputs.rho * inputs.eps))
        )
    else:
        k_hat = math.inf
    k_bar_m = math.ceil(
        2.0 * math.e * inputs.n * c / inputs.eps - 2.0 * inputs.n * c / d0
    ) * math.ceil(math.log(1.0 / inputs.rho))
    return expected, k_bar, k_hat, float(k_bar_m)


def arcd_lambda(alphas, n: int):
    """lambda_k = prod_{i<k} (1 - alpha_i/n), with lambda_0 = 1."""
    import numpy as np

    alphas = np.asarray(alphas, dtype=float)
    return np.cumprod(np.concatenate(([1.0], 1.0 - alphas / n)))


def arcd_bound(inputs: BoundInputs, k: int) -> float:
    """Accelerated expected-gap bound lambda_k (delta0 + gamma0 R0^2 / 2)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    _, _, lambdas = alpha_schedule(inputs.gamma0, inputs.mu_f, inputs.n, k)
    return float(lambdas[k]) * (inputs.delta0 + 0.5 * inputs.gamma0 * inputs.R0**2)


def arcd_lambda_envelope(inputs: BoundInputs, k: int) -> float:
    """min{(1 - sqrt(mu)/n)^k, (n/(n + k sqrt(gamma0)/2))^2}; needs gamma0 >= mu."""
    if inputs.gamma0 < inputs.mu_f:
        raise ValueError("the lambda envelope requires gamma0 >= mu")
    geo = (1.0 - math.sqrt(inputs.mu_f) / inputs.n) ** k
    sub = (inputs.n / (inputs.n + 0.5 * k * math.sqrt(inputs.gamma0))) ** 2
    return min(geo, sub)


def arcd_envelope_bound(inputs: BoundInputs, k: int) -> float:
    """Envelope form of the accelerated bound, used for rate comparisons."""
    return arcd_lambda_envelope(inputs, k) * (
        inputs.delta0 + 0.5 * inputs.gamma0 * inputs.R0**2
    )


def nesterov_arcd_bounds(inputs: BoundInputs, k: int) -> float:
    """Prior accelerated bound: the mu > 0 bracket form, else (n/(k+1))^2 form.

    The bracket term is evaluated in the log domain; for large k the result
    underflows to 0 instead of overflowing mid-expression.
    """
    mu = inputs.mu_f
    base = 2.0 * inputs.R0**2 + inputs.delta0 / inputs.n**2
    if mu <= 0:
        return (inputs.n / (k + 1)) ** 2 * base
    if base == 0.0:
        return 0.0
    root = math.sqrt(mu) / (2.0 * inputs.n)
    lp = (k + 1) * math.log1p(root)
    lm = (k + 1) * math.log1p(-root)
    log_bracket = lp + math.log1p(-math.exp(lm - lp))
    log_val = math.log(mu * base) - 2.0 * log_bracket
    if log_val < -745.0:
        return 0.0
    if log_val > 709.0:
        return math.inf
    return math.exp(log_val)


_THRESHOLD_KEYS = (
    "K",
    "K_tilde",
    "K_underline",
    "r",
    "K_M",
    "K_bar",
    "K_hat",
    "K_bar_M",
)


def bound_report(inputs: BoundInputs, k_grid) -> dict:
    """Evaluate every applicable bound over a k-grid plus scalar thresholds."""
    ks = [int(k) for k in k_grid]
    strong = inputs.mu_f + inputs.mu_psi > 0
    bounds: dict[str, list[float]] = {
        "rbcd_general": [rbcd_bound_general(inputs, k) for k in ks],
        "arcd": [],
        "arcd_envelope": [],
        "nesterov_arcd": [nesterov_arcd_bounds(inputs, k) for k in ks],
    }
    kmax = max(ks) if ks else 0
    _, _, lambdas = alpha_schedule(inputs.gamma0, inputs.mu_f, inputs.n, kmax)
    level = inputs.delta0 + 0.5 * inputs.gamma0 * inputs.R0**2
    bounds["arcd"] = [float(lambdas[k]) * level for k in ks]
    if inputs.gamma0 >= inputs.mu_f:
        bounds["arcd_envelope"] = [arcd_envelope_bound(inputs, k) for k in ks]
    else:
        del bounds["arcd_envelope"]
    if strong:
        bounds["rbcd_strong"] = [rbcd_bound_strong(inputs, k) for k in ks]

    thresholds: dict[str, float | int | None] = dict.fromkeys(_THRESHOLD_KEYS)
    k_under, r, k_multi = rbcd_multirun_K(inputs)
    thresholds["K_underline"] = k_under
    thresholds["r"] = r
    thresholds["K_M"] = k_multi
    if inputs.c is not None:
        thresholds["K"] = rbcd_highprob_K(inputs)
        if inputs.delta0 > 0:
            expected, k_bar, k_hat, k_bar_m = rt_bounds(inputs, kmax)
            thresholds["K_bar"] = k_bar
            thresholds["K_hat"] = None if math.isinf(k_hat) else k_hat
            thresholds["K_bar_M"] = k_bar_m
            bounds["rt_expected"] = [rt_bounds(inputs, k)[0] for k in ks]
    if strong:
        thresholds["K_tilde"] = rbcd_highprob_K_strong(inputs)

    echo = {
        "n": inputs.n,
        "mu_f": inputs.mu_f,
        "mu_psi": inputs.mu_psi,
        "R0": inputs.R0,
        "Rbar0": inputs.Rbar0,
        "delta0": inputs.delta0,
        "gamma0": inputs.gamma0,
        "eps": inputs.eps,
        "rho": inputs.rho,
        "c": inputs.c,
    }
    return {"inputs": echo, "k": ks, "bounds": bounds, "thresholds": thresholds}
