"""Approximate-voter sizing, truncation planning and fault simulation."""

import json as _json

from . import _xrel
from ._xrel import (
    InputError,
    IoError,
    ValidationError,
    __version__,
    benchmark_names,
    compute_k,
    compute_mted,
    fir_experiment,
    inject_noise,
    metrics,
    mse_ratio_from_mse,
    random_words,
    run_voter_campaign,
    size_voter,
    variance_upper_bound,
    vote,
    voters,
)


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def build_benchmark(name, width=16):
    """Benchmark DFG as a dict."""
    return _json.loads(_xrel.build_benchmark(name, width))


def validate_dfg(dfg):
    """Every invariant the graph breaks; empty when valid."""
    return _xrel.validate_dfg(_text(dfg))


def evaluate(dfg, inputs, plan=None):
    """Output values of the graph, exact or under a truncation plan."""
    return _xrel.evaluate(_text(dfg), inputs, None if plan is None else _text(plan))


def measure_output_variance(dfg, plan, trials=100000, seed=1):
    """Monte Carlo variance of the largest output error under a plan."""
    return _xrel.measure_output_variance(_text(dfg), _text(plan), trials, seed)


def design(dfg, v_ub=None, k=None, n_bits=16, trials=100000, seed=1):
    """Cheapest truncation plan whose predicted output variance fits the budget.

    Pass either v_ub or k; k is turned into a budget for an n_bits voter.
    """
    if (v_ub is None) == (k is None):
        raise ValueError("pass exactly one of v_ub and k")
    if v_ub is None:
        v_ub = variance_upper_bound(n_bits, k)
    result = _xrel.design(_text(dfg), v_ub, trials, seed)
    result["plan"] = _json.loads(result["plan"])
    return result


__all__ = [
    "InputError",
    "IoError",
    "ValidationError",
    "benchmark_names",
    "build_benchmark",
    "compute_k",
    "compute_mted",
    "design",
    "evaluate",
    "fir_experiment",
    "inject_noise",
    "measure_output_variance",
    "metrics",
    "mse_ratio_from_mse",
    "random_words",
    "run_voter_campaign",
    "size_voter",
    "validate_dfg",
    "variance_upper_bound",
    "vote",
    "voters",
]
