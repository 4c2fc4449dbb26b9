"""Problem JSON schema round-trips and bundled fixtures."""

import json

import numpy as np
import pytest

from blockcoord.io import (
    BUNDLED_PROBLEMS,
    bundled_problem,
    load_problem,
    problem_from_dict,
    problem_to_dict,
    save_problem,
)
from blockcoord.oracles import (
    BoxIndicator,
    LeastSquaresOracle,
    ProblemFormatError,
    SquaredL2Reg,
)
from conftest import random_problem


@pytest.mark.parametrize("kind", ["quadratic", "lasso", "box", "sql2"])
def test_dict_round_trip(kind):
    problem = random_problem(kind, seed=130)
    spec = problem_to_dict(problem)
    back = problem_from_dict(spec)
    assert back.name == problem.name
    assert back.partition.sizes == problem.partition.sizes
    assert np.array_equal(back.x0, problem.x0)
    x = np.random.default_rng(0).standard_normal(problem.dim) * 0.1
    if kind == "box":
        x = np.clip(x, problem.regularizer.lower, problem.regularizer.upper)
    assert back.F(x) == pytest.approx(problem.F(x), rel=1e-14)


def test_file_round_trip(tmp_path):
    problem = random_problem("lasso", seed=131)
    path = tmp_path / "p.json"
    save_problem(problem, path)
    back = load_problem(path)
    assert np.array_equal(back.x0, problem.x0)
    assert np.array_equal(back.smooth.A, problem.smooth.A)


def test_least_squares_round_trip(tmp_path):
    rng = np.random.default_rng(132)
    spec = {
        "name": "ls",
        "n_blocks": 2,
        "block_sizes": [2, 2],
        "smooth": {
            "type": "least_squares",
            "matrix": rng.standard_normal((6, 4)).tolist(),
            "vector": rng.standard_normal(6).tolist(),
        },
        "regularizer": {"type": "zero"},
        "x0": [0.0, 0.0, 0.0, 0.0],
    }
    problem = problem_from_dict(spec)
    assert isinstance(problem.smooth, LeastSquaresOracle)
    again = problem_to_dict(problem)
    assert again["smooth"]["type"] == "least_squares"
    assert again["smooth"]["matrix"] == spec["smooth"]["matrix"]


def test_box_null_bounds_mean_unbounded():
    spec = {
        "n_blocks": 1,
        "block_sizes": [2],
        "smooth": {
            "type": "quadratic",
            "matrix": [[1.0, 0.0], [0.0, 1.0]],
            "vector": [0.0, 0.0],
        },
        "regularizer": {"type": "box", "lower": [None, 0.0], "upper": [1.0, None]},
        "x0": [0.5, 0.5],
    }
    problem = problem_from_dict(spec)
    reg = problem.regularizer
    assert isinstance(reg, BoxIndicator)
    assert reg.lower[0] == -np.inf and reg.upper[1] == np.inf
    assert reg.eval(np.array([-1e12, 0.5])) == 0.0
    assert reg.eval(np.array([2.0, 0.5])) == np.inf
    # round-trip restores the nulls
    assert problem_to_dict(problem)["regularizer"]["lower"][0] is None


@pytest.mark.parametrize(
    "mutate",
    [
        lambda s: s.pop("n_blocks"),
        lambda s: s.pop("smooth"),
        lambda s: s["smooth"].pop("matrix"),
        lambda s: s["smooth"].update(type="cubic"),
        lambda s: s["regularizer"].update(type="l7"),
        lambda s: s.update(block_sizes=[3]),
        lambda s: s.update(x0=[1.0]),
    ],
)
def test_schema_errors(mutate):
    spec = {
        "n_blocks": 1,
        "block_sizes": [2],
        "smooth": {
            "type": "quadratic",
            "matrix": [[1.0, 0.0], [0.0, 1.0]],
            "vector": [0.0, 0.0],
        },
        "regularizer": {"type": "zero"},
        "x0": [0.0, 0.0],
    }
    mutate(spec)
    with pytest.raises(ProblemFormatError):
        problem_from_dict(spec)


def test_invalid_json_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ProblemFormatError):
        load_problem(path)


def test_unknown_bundled_name():
    with pytest.raises(ProblemFormatError):
        bundled_problem("nonexistent")


@pytest.mark.parametrize("name", BUNDLED_PROBLEMS)
def test_bundled_problems_load(name):
    problem = bundled_problem(name)
    assert problem.name == name
    assert np.isfinite(problem.F(problem.x0))
    assert problem.dim <= 100 and problem.n <= 20


def test_bundled_regimes():
    lasso = bundled_problem("lasso-20d")
    assert lasso.n == 10 and lasso.dim == 20
    assert lasso.mu_f == 0.0

    strong = bundled_problem("strongly-convex-50d")
    assert isinstance(strong.regularizer, SquaredL2Reg)
    assert strong.mu_total > 0

    smooth = bundled_problem("smooth-qp-100d")
    assert smooth.is_smooth_unconstrained()
    assert 1e-3 <= smooth.mu_f <= 1e-2


def test_numbers_survive_json_text(tmp_path):
    problem = random_problem("quadratic", seed=133)
    path = tmp_path / "p.json"
    save_problem(problem, path)
    raw = json.loads(path.read_text())
    assert raw["smooth"]["matrix"][0][0] == problem.smooth.A[0, 0]
