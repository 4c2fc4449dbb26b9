"""Problem JSON schema and bundled test problems.

A problem file is a JSON object:

    {
      "name": "lasso-20d",                  # optional
      "n_blocks": 10,
      "block_sizes": [2, 2, ...],
      "smooth": {
        "type": "quadratic" | "least_squares",
        "matrix": [[...], ...],             # row-major dense
        "vector": [...]
      },
      "regularizer": {
        "type": "zero" | "l1" | "box" | "squared_l2",
        "weights": [...],                   # l1: one weight per coordinate
        "lower": [...], "upper": [...],     # box: null entries mean unbounded
        "sigmas": [...]                     # squared_l2: one per block
      },
      "x0": [...]
    }

Numbers are IEEE-754 doubles in decimal text.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .blocks import BlockPartition
from .oracles import (
    BoxIndicator,
    L1Reg,
    LeastSquaresOracle,
    ProblemFormatError,
    ProblemInstance,
    QuadraticOracle,
    Regularizer,
    SmoothOracle,
    SquaredL2Reg,
    ZeroReg,
)

BUNDLED_PROBLEMS = ("lasso-20d", "box-qp-10d", "strongly-convex-50d", "smooth-qp-100d")


def _required(obj: dict, key: str, where: str):
    if key not in obj:
        raise ProblemFormatError(f"missing field {key!r} in {where}")
    return obj[key]


def problem_from_dict(spec: dict) -> ProblemInstance:
    if not isinstance(spec, dict):
        raise ProblemFormatError("problem description must be a JSON object")
    n_blocks = int(_required(spec, "n_blocks", "problem"))
    sizes = _required(spec, "block_sizes", "problem")
    if len(sizes) != n_blocks:
        raise ProblemFormatError("block_sizes length must equal n_blocks")
    try:
        partition = BlockPartition(tuple(int(s) for s in sizes))
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from exc

    sm = _required(spec, "smooth", "problem")
    sm_type = _required(sm, "type", "smooth")
    matrix = np.asarray(_required(sm, "matrix", "smooth"), dtype=float)
    vector = np.asarray(_required(sm, "vector", "smooth"), dtype=float)
    if sm_type == "quadratic":
        smooth: SmoothOracle = QuadraticOracle(partition, matrix, vector)
    elif sm_type == "least_squares":
        smooth = LeastSquaresOracle(partition, matrix, vector)
    else:
        raise ProblemFormatError(f"unknown smooth type {sm_type!r}")

    rg = _required(spec, "regularizer", "problem")
    rg_type = _required(rg, "type", "regularizer")
    if rg_type == "zero":
        reg: Regularizer = ZeroReg(partition)
    elif rg_type == "l1":
        reg = L1Reg(partition, np.asarray(_required(rg, "weights", "l1"), dtype=float))
    elif rg_type == "box":
        lower = [(-np.inf if v is None else float(v)) for v in _required(rg, "lower", "box")]
        upper = [(np.inf if v is None else float(v)) for v in _required(rg, "upper", "box")]
        reg = BoxIndicator(partition, np.array(lower), np.array(upper))
    elif rg_type == "squared_l2":
        reg = SquaredL2Reg(
            partition, np.asarray(_required(rg, "sigmas", "squared_l2"), dtype=float)
        )
    else:
        raise ProblemFormatError(f"unknown regularizer type {rg_type!r}")

    x0 = np.asarray(_required(spec, "x0", "problem"), dtype=float)
    return ProblemInstance(smooth, reg, x0, name=str(spec.get("name", "problem")))


def problem_to_dict(problem: ProblemInstance) -> dict:
    smooth = problem.smooth
    if isinstance(smooth, LeastSquaresOracle):
        sm = {
            "type": "least_squares",
            "matrix": smooth.design.tolist(),
            "vector": smooth.targets.tolist(),
        }
    elif isinstance(smooth, QuadraticOracle):
        sm = {"type": "quadratic", "matrix": smooth.A.tolist(), "vector": smooth.b.tolist()}
    else:
        raise ProblemFormatError("only quadratic and least-squares oracles serialize")

    reg = problem.regularizer
    if isinstance(reg, ZeroReg):
        rg: dict = {"type": "zero"}
    elif isinstance(reg, L1Reg):
        rg = {"type": "l1", "weights": reg.weights.tolist()}
    elif isinstance(reg, BoxIndicator):
        rg = {
            "type": "box",
            "lower": [None if v == -np.inf else v for v in reg.lower],
            "upper": [None if v == np.inf else v for v in reg.upper],
        }
    elif isinstance(reg, SquaredL2Reg):
        rg = {"type": "squared_l2", "sigmas": reg.sigmas.tolist()}
    else:
        raise ProblemFormatError("unknown regularizer class")

    return {
        "name": problem.name,
        "n_blocks": problem.n,
        "block_sizes": list(problem.partition.sizes),
        "smooth": sm,
        "regularizer": rg,
        "x0": problem.x0.tolist(),
    }


def load_problem(path) -> ProblemInstance:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON in {path}: {exc}") from exc
    return problem_from_dict(spec)


def save_problem(problem: ProblemInstance, path):
    with open(path, "w") as fh:
        json.dump(problem_to_dict(problem), fh)
        fh.write("\n")


def bundled_problem(name: str) -> ProblemInstance:
    """Load one of the problems shipped with the package."""
    if name not in BUNDLED_PROBLEMS:
        raise ProblemFormatError(
            f"unknown bundled problem {name!r}; available: {', '.join(BUNDLED_PROBLEMS)}"
        )
    text = resources.files("blockcoord.data").joinpath(f"{name}.json").read_text()
    return problem_from_dict(json.loads(text))
