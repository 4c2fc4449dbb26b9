#!/usr/bin/env python3
"""Run every applicable certification on the bundled problems.

Writes one JSON report per (problem, claim) pair and prints a summary
table.  Intended as the desk-scale reproduction of the full verification
campaign; the acceptance tests run the same checks with pinned seeds.

Usage:
    python3 scripts/run_certifications.py [outdir] [--runs M] [--jobs J]
"""

import argparse
import json
import time
from pathlib import Path

from blockcoord.harness import certify, reference_solve
from blockcoord.io import BUNDLED_PROBLEMS, bundled_problem

PLANS = {
    "lasso-20d": ["3.1-general", "3.2i", "3.3"],
    "box-qp-10d": ["3.1-general", "3.1-strong", "3.2i", "3.2ii", "3.3"],
    "strongly-convex-50d": ["3.1-general", "3.1-strong", "3.2ii"],
    "smooth-qp-100d": ["3.1-general", "4.1"],
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("outdir", nargs="?", default="reports")
    parser.add_argument("--runs", type=int, default=400)
    parser.add_argument("--batches", type=int, default=200)
    parser.add_argument("--kmax", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for name in BUNDLED_PROBLEMS:
        problem = bundled_problem(name)
        reference = reference_solve(problem)
        for theorem in PLANS[name]:
            t0 = time.perf_counter()
            report = certify(
                problem,
                theorem,
                runs=args.runs,
                kmax=args.kmax,
                record_every=max(1, args.kmax // 100),
                seed=args.seed,
                batches=args.batches,
                reference=reference,
                jobs=args.jobs,
            )
            dt = time.perf_counter() - t0
            verdict = "skip" if report.skipped else ("pass" if report.passed else "FAIL")
            rows.append((name, theorem, verdict, report.worst_margin, dt))
            path = outdir / f"{name}-{theorem}.json"
            with open(path, "w") as fh:
                json.dump(report.to_dict(), fh, indent=1)
                fh.write("\n")
            note = report.skipped or f"worst margin {report.worst_margin:.3e}"
            print(f"{name:22s} {theorem:12s} {verdict:5s} {note} ({dt:.1f}s)")

    failures = [r for r in rows if r[2] == "FAIL"]
    print(f"\n{len(rows)} certifications, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
