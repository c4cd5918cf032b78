"""Stochastic dual coordinate descent with adaptive heavy-ball momentum.

Solvers for ``min f(x) s.t. Ax = b`` with strongly convex ``f``, plus the
classical baselines (linearized Bregman, ADMM, sparse Kaczmarz, CGNE) and a
small experiment harness.
"""

from fsdcd.convex import (
    ConjugatePair,
    bregman_distance,
    make_elastic_net,
    make_quadratic,
    make_shifted_quadratic,
    soft_threshold,
)
from fsdcd.linalg import ProblemInstance, make_problem
from fsdcd.metrics import TraceRecord, rse
from fsdcd.solvers import SolveOptions, SolverState, solve

__all__ = [
    "ConjugatePair",
    "ProblemInstance",
    "SolveOptions",
    "SolverState",
    "TraceRecord",
    "bregman_distance",
    "make_elastic_net",
    "make_problem",
    "make_quadratic",
    "make_shifted_quadratic",
    "rse",
    "soft_threshold",
    "solve",
]

__version__ = "0.1.0"
