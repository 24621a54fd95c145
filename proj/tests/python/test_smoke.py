import math
import os
import subprocess

import numpy as np
import pytest

import normest


def test_depth_set_and_scalar_mom():
    assert normest.majority_depth_set([0, 1, 2, 10, 11], 1.5) == [(0.5, 1.5)]
    assert normest.majority_depth_set([0, 10, 20], 1.0) == []
    assert normest.scalar_mom([1, 2, 3, 4, 100, 5], 3) == 3.5
    assert normest.blocks_for_confidence(0.05, 1000) == 4


def test_functionals_and_norms():
    fs = normest.dual_functionals("l1", 3)
    assert fs.exact and fs.size == 8 and fs.dim == 3
    assert normest.norm_eval(np.array([1.0, -2.0, 3.0]), fs) == 6.0
    with pytest.raises(ValueError):
        normest.dual_functionals("l7", 3)


def test_estimate_constant_sample():
    x = np.tile([1.5, -2.0, 0.25], (40, 1))
    r = normest.adaptive_estimate(x, "l2", budget=64)
    assert r["feasible"]
    np.testing.assert_array_equal(r["point"], [1.5, -2.0, 0.25])
    r = normest.estimate_mean(x, "linf", 0.05, 0.1)
    assert r["feasible"] and r["n"] == 4


def test_estimate_is_close_on_gaussian_data():
    x = normest.sample_distribution({"kind": "gaussian", "mu": [1.0, 2.0]}, 2000, 2, seed=3)
    r = normest.adaptive_estimate(x, "linf")
    assert np.max(np.abs(r["point"] - [1.0, 2.0])) < 0.2
    assert abs(normest.empirical_mean(x)[0] - 1.0) < 0.1
    assert normest.coordinatewise_mom(x, 5).shape == (2,)
    assert normest.geometric_mom(x, 5).shape == (2,)


def test_bounds():
    delta = 2 / math.exp(4)
    assert normest.euclidean_bound(np.eye(4), 100, delta) == pytest.approx(0.4)
    assert normest.oracle_epsilon(3, 2.5, 1, 100, delta) == pytest.approx(0.45)
    assert normest.weak_variance_R(np.diag([1.0, 4.0]), "linf") == 2.0
    mean, se = normest.gaussian_norm_expectation(np.eye(1), "linf", 20000, seed=1)
    assert abs(mean - math.sqrt(2 / math.pi)) <= 4 * se


def test_certify():
    rep = normest.certify_uniform(np.array([[0.0], [0.1], [5.0]]), "linf", np.zeros(1), 0.5, 3)
    assert rep["pass"] and rep["min_coverage"] == 2


def test_run_experiment_is_deterministic():
    cfg = {"distribution": {"kind": "student_t", "dof": 4}, "d": 2, "N": 100, "trials": 8,
           "master_seed": 5, "bound_trials": 100}
    a = normest.run_experiment(cfg)
    b = normest.run_experiment(cfg, threads=2)
    assert a == b
    assert set(a["estimators"]) == {"empirical", "cw_mom", "geo_mom", "slab"}
    with pytest.raises(normest.ParseError):
        normest.run_experiment({**cfg, "bogus": 1})


@pytest.mark.skipif("NORMEST_BIN" not in os.environ, reason="CLI binary path not provided")
def test_cli_version():
    out = subprocess.run([os.environ["NORMEST_BIN"], "--version"], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == normest.__version__
