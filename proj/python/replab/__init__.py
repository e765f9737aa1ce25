"""Python front end to the replab C++ core.

Reports and fits come back from C++ as JSON text and are decoded here.
"""

import json

from . import _replab
from ._replab import (
    SourceModel,
    __version__,
    block_entropy,
    block_probability,
    context_length,
    curve,
    entropy_rate,
    hilberg_exponent,
    ingest,
    renyi_entropy,
    sample,
    weighted_entropy,
)

INF = float("inf")


def fit_law(ks, values, law):
    return json.loads(_replab.fit_law(list(map(float, ks)), list(map(float, values)), law))


def verify_kac(model, k, trials=100000, seed=0, block=None):
    return json.loads(_replab.verify_kac(model, k, trials, seed, block))


def verify_kontoyiannis(model, k, trials=100000, seed=0):
    return json.loads(_replab.verify_kontoyiannis(model, k, trials, seed))


def check_prop4(model, ks):
    return json.loads(_replab.check_prop4(model, list(ks)))


def check_path_bounds(model, proposition, paths=50, n=1_000_000, ks=(1, 2, 4, 8, 16, 20), seed=0):
    return json.loads(_replab.check_path_bounds(model, proposition, paths, n, list(ks), seed))


def theorem_report(model, paths=201, n=1 << 20, seed=0):
    return json.loads(_replab.theorem_report(model, paths, n, seed))


def model_from_json(spec):
    """Build a model from a dict or JSON string in the config format."""
    return SourceModel.from_json(spec if isinstance(spec, str) else json.dumps(spec))


__all__ = [
    "INF",
    "SourceModel",
    "__version__",
    "block_entropy",
    "block_probability",
    "check_path_bounds",
    "check_prop4",
    "context_length",
    "curve",
    "entropy_rate",
    "fit_law",
    "hilberg_exponent",
    "ingest",
    "model_from_json",
    "renyi_entropy",
    "sample",
    "theorem_report",
    "verify_kac",
    "verify_kontoyiannis",
    "weighted_entropy",
]
