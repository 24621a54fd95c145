"""Norm-aware median-of-means mean estimation."""

import json

from ._normest import (  # noqa: F401
    FunctionalSet,
    ParseError,
    __version__,
    adaptive_estimate,
    blocks_for_confidence,
    certify_uniform,
    coordinatewise_mom,
    dual_functionals,
    empirical_mean,
    estimate_mean,
    euclidean_bound,
    exact_norm,
    gaussian_norm_expectation,
    geometric_mom,
    majority_depth_set,
    norm_eval,
    oracle_epsilon,
    scalar_mom,
    weak_variance_R,
)
from . import _normest


def sample_distribution(spec, N, d, seed=0):
    """Draw an N x d sample. `spec` uses the same keys as a bench config's
    "distribution" entry, e.g. {"kind": "student_t", "dof": 3}."""
    return _normest._sample_distribution(json.dumps(spec), N, d, seed)


def run_experiment(config, threads=1):
    """Run a bench experiment from a config dict and return the report dict."""
    return json.loads(_normest._run_experiment(json.dumps(config), threads))
