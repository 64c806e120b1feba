"""Tropical Monte Carlo for Feynman and Euler-Mellin integrals."""

import json
import os

from . import _core
from ._core import (
    ConvergenceError,
    DivergenceError,
    Error,
    MemoryCapError,
    ParseError,
    RejectionBudgetError,
)

__all__ = [
    "ConvergenceError",
    "DivergenceError",
    "Error",
    "MemoryCapError",
    "ParseError",
    "RejectionBudgetError",
    "integrate",
    "log_j",
    "run",
    "sample",
    "trop_eval_log",
]


def _graph_text(graph):
    if isinstance(graph, dict):
        return json.dumps(graph)
    with open(os.fspath(graph)) as f:
        return f.read()


def integrate(graph, samples=1_000_000, seed=42, workers=1, eps_order=0):
    """Estimate the integral of a graph given as a dict or a JSON file path."""
    text = _core.integrate(_graph_text(graph), samples, seed, workers, eps_order)
    return json.loads(text)


def sample(graph, count, seed=42):
    """Draw points from the tropical measure; returns lists of log x."""
    return _core.sample(_graph_text(graph), count, seed)


def log_j(r):
    """log of the tropical normalization for subset values r indexed by bitmask."""
    n = len(r).bit_length() - 1
    if len(r) != 1 << n:
        raise ValueError("length of r must be a power of two")
    return _core.log_j(n, list(r))


def trop_eval_log(poly, y):
    """Tropical log-evaluation of a polynomial in the text format."""
    return _core.trop_eval_log(poly, list(y))


def run(*args):
    """Run the command line front end; returns (exit_code, stdout, stderr)."""
    return _core.run([str(a) for a in args])
