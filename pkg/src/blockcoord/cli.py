"""Command-line surface for solving, estimating expectations, and certifying.

Subcommands:
    solve     run one seeded rbcd/arcd trace, write a trace CSV
    expect    mean/SE optimality-gap curve over many seeded runs (CSV)
    bounds    evaluate the closed-form bounds over a k-grid (JSON report)
    certify   statistically certify a convergence claim (JSON report)
    check-es  verify the tracked quadratic sequence of an arcd run (JSON)
    compare   print bound ratios against the prior-work formulas

Usage:
    blockcoord solve --problem lasso.json --method rbcd --iters 1000 --seed 7 --out trace.csv
    blockcoord expect --problem lasso.json --method rbcd --iters 2000 --runs 400 --out curve.csv
    blockcoord bounds --n 2 --c 1 --r0 1 --delta0 0.5 --rho 0.25 --eps 0.5 --kmax 100 --out rep.json
    blockcoord certify --problem lasso.json --theorem 3.1-general --out cert.json
    blockcoord compare --against rt --n 10 --r0 1 --rbar0 2 --delta0 1 --kmax 1000000

Exit codes: 0 success, 2 input/validation error, 3 numeric failure,
4 certification failure (certify only).  BLOCKCOORD_SEED sets the default
seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .harness import (
    certify,
    estimate_expectation,
    reference_solve,
    run_es_verification,
)
from .io import load_problem
from .oracles import NumericalError, ProblemFormatError
from .rates import (
    BoundInputs,
    arcd_envelope_bound,
    bound_report,
    nesterov_arcd_bounds,
    rbcd_bound_general,
    rbcd_highprob_K,
    rt_bounds,
)
from .rbcd import SolverConfig, VerificationError, rbcd_run
from .arcd import arcd_run_gamma

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_CERT_FAIL = 4


def _default_seed() -> int:
    return int(os.environ.get("BLOCKCOORD_SEED", "0"))


def _add_problem_arg(p):
    p.add_argument("--problem", required=True, help="problem JSON file")


def _load(path):
    if not os.path.isfile(path):
        raise ProblemFormatError(f"problem file not found: {path}")
    return load_problem(path)


def _inputs_from_args(args) -> BoundInputs:
    if getattr(args, "inputs", None):
        if not os.path.isfile(args.inputs):
            raise ProblemFormatError(f"inputs file not found: {args.inputs}")
        with open(args.inputs) as fh:
            raw = json.load(fh)
        known = {
            "n", "mu_f", "mu_psi", "R0", "Rbar0", "delta0", "gamma0", "eps", "rho", "c",
        }
        bad = set(raw) - known
        if bad:
            raise ProblemFormatError(f"unknown bound-input fields: {sorted(bad)}")
        return BoundInputs(**raw)
    if args.n is None:
        raise ProblemFormatError("provide --inputs FILE or at least --n")
    return BoundInputs(
        n=args.n,
        mu_f=args.mu_f,
        mu_psi=args.mu_psi,
        R0=args.r0,
        Rbar0=args.rbar0,
        delta0=args.delta0,
        gamma0=args.gamma0,
        eps=args.eps,
        rho=args.rho,
        c=args.c,
    )


def _add_inputs_args(p):
    p.add_argument("--inputs", help="JSON file with bound inputs")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mu-f", dest="mu_f", type=float, default=0.0)
    p.add_argument("--mu-psi", dest="mu_psi", type=float, default=0.0)
    p.add_argument("--r0", type=float, default=0.0)
    p.add_argument("--rbar0", type=float, default=None)
    p.add_argument("--delta0", type=float, default=0.0)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--rho", type=float, default=0.1)
    p.add_argument("--c", type=float, default=None)


def _k_grid(kmax: int, points: int = 200) -> list[int]:
    if kmax <= points:
        return list(range(kmax + 1))
    grid = np.unique(
        np.concatenate(
            ([0], np.geomspace(1, kmax, points).astype(np.int64), [kmax])
        )
    )
    return [int(k) for k in grid]


def cmd_solve(args) -> int:
    problem = _load(args.problem)
    cfg = SolverConfig(
        max_iters=args.iters,
        seed=args.seed,
        record_every=args.record_every,
        verify_descent=args.verify,
        record_gdual=args.gdual,
    )
    if args.method == "rbcd":
        trace = rbcd_run(problem, cfg)
    else:
        trace, _ = arcd_run_gamma(problem, cfg, gamma0=args.gamma0)
    trace.to_csv(args.out)
    return EXIT_OK


def cmd_expect(args) -> int:
    problem = _load(args.problem)
    cfg = SolverConfig(
        max_iters=args.iters, seed=args.seed, record_every=args.record_every
    )
    curve = estimate_expectation(
        problem,
        args.method,
        cfg,
        runs=args.runs,
        gamma0=args.gamma0,
        jobs=args.jobs,
    )
    curve.to_csv(args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    inputs = _inputs_from_args(args)
    report = bound_report(inputs, _k_grid(args.kmax))
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    return EXIT_OK


def cmd_certify(args) -> int:
    problem = _load(args.problem)
    report = certify(
        problem,
        args.theorem,
        runs=args.runs,
        kmax=args.kmax,
        record_every=args.record_every,
        seed=args.seed,
        eps=args.eps,
        eps_frac=args.eps_frac,
        rho=args.rho,
        gamma0=args.gamma0,
        batches=args.batches,
        jobs=args.jobs,
    )
    payload = report.to_dict()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    verdict = "skip" if report.skipped else ("pass" if report.passed else "fail")
    print(f"{args.theorem} on {problem.name}: {verdict}")
    return EXIT_OK if report.passed else EXIT_CERT_FAIL


def cmd_check_es(args) -> int:
    problem = _load(args.problem)
    report = run_es_verification(
        problem,
        iters=args.iters,
        probes=args.probes,
        runs=args.runs,
        gamma0=args.gamma0,
        seed=args.seed,
    )
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=1)
            fh.write("\n")
    print(f"estimate-sequence check on {problem.name}: {'ok' if report['ok'] else 'FAILED'}")
    return EXIT_OK


def cmd_compare(args) -> int:
    inputs = _inputs_from_args(args)
    k = args.kmax
    if args.against == "rt":
        ours = rbcd_bound_general(inputs, k)
        theirs = rt_bounds(inputs, k)[0]
        print(f"k={k} new_bound={ours:.6g} rt_bound={theirs:.6g}")
        print(f"b_over_a={theirs / ours:.6g}")
        k_new = rbcd_highprob_K(inputs)
        k_bar = rt_bounds(inputs, k)[1]
        print(f"K={k_new:.6g} K_bar={k_bar:.6g} K_minus_K_bar={k_new - k_bar:.6g}")
    else:
        ours = arcd_envelope_bound(inputs, k)
        theirs = nesterov_arcd_bounds(inputs, k)
        print(f"k={k} new_bound={ours:.6g} prior_bound={theirs:.6g}")
        print(f"prior_over_new={theirs / ours:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockcoord",
        description="block-coordinate descent solvers and rate certification",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    seed = _default_seed()

    p = sub.add_parser("solve", help="run one seeded trace")
    _add_problem_arg(p)
    p.add_argument("--method", choices=("rbcd", "arcd"), required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="assert blockwise descent")
    p.add_argument("--gdual", action="store_true", help="record the dual residual")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("expect", help="mean/SE gap curve over seeded runs")
    _add_problem_arg(p)
    p.add_argument("--method", choices=("rbcd", "arcd"), required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("bounds", help="closed-form bound report over a k-grid")
    _add_inputs_args(p)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("certify", help="statistically certify one claim")
    _add_problem_arg(p)
    p.add_argument(
        "--theorem",
        required=True,
        choices=("3.1-general", "3.1-strong", "3.2i", "3.2ii", "3.3", "4.1"),
    )
    p.add_argument("--runs", type=int, default=400)
    p.add_argument("--kmax", type=int, default=2000)
    p.add_argument("--record-every", type=int, default=20)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps-frac", dest="eps_frac", type=float, default=0.1)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--batches", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check-es", help="verify the tracked quadratic sequence")
    _add_problem_arg(p)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--probes", type=int, default=50)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check_es)

    p = sub.add_parser("compare", help="ratios against prior-work bounds")
    p.add_argument("--against", choices=("rt", "nesterov"), required=True)
    _add_inputs_args(p)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, VerificationError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
