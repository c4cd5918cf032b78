"""Adaptive heavy-ball step for a general L-smooth function.

Same majorise-and-minimise choice of ``(alpha, beta)`` as the dual method,
but applied directly to ``phi`` with a full gradient available.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from fsdcd.sampling import SampleOperator
from fsdcd.solvers.dual import EPS_GRAM


@dataclass(frozen=True)
class SmoothFunction:
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    L: float


def least_squares(A: np.ndarray, b: np.ndarray) -> SmoothFunction:
    """``phi(x) = ||Ax - b||^2 / 2`` with ``L = sigma_1(A)^2``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def value(x):
        r = A @ x - b
        return 0.5 * float(np.dot(r, r))

    return SmoothFunction(value, lambda x: A.T @ (A @ x - b), float(np.linalg.norm(A, 2) ** 2))


def hb_smooth_parameters(g: np.ndarray, S: SampleOperator, dx: np.ndarray, L: float) -> tuple[float, float, bool]:
    """``(alpha, beta, degenerate)`` minimising the L-smooth upper model along
    ``-S S^T g`` and ``dx``."""
    sg = S.apply_St(g)
    u = S.apply_S(sg)
    s2 = float(np.dot(sg, sg))
    uu = float(np.dot(u, u))
    xx = float(np.dot(dx, dx))
    ux = float(np.dot(u, dx))
    gx = float(np.dot(g, dx))
    if uu == 0.0:
        return 0.0, 0.0, True
    det = uu * xx - ux * ux
    if xx == 0.0 or det <= EPS_GRAM * uu * xx:
        return (s2 / uu) / L, 0.0, True
    alpha = ((s2 * xx - ux * gx) / det) / L
    beta = ((s2 * ux - uu * gx) / det) / L
    return alpha, beta, False


def hb_smooth_step(phi: SmoothFunction, x: np.ndarray, x_prev: np.ndarray, S: SampleOperator):
    """``x' = x - alpha S S^T grad phi(x) + beta (x - x_prev)``.

    Returns ``(x', x, alpha, beta, degenerate)`` so the caller can chain steps.
    """
    g = phi.grad(x)
    alpha, beta, degenerate = hb_smooth_parameters(g, S, x - x_prev, phi.L)
    if alpha == 0.0 and beta == 0.0:
        return x, x_prev, 0.0, 0.0, degenerate
    x_new = x - alpha * S.apply_S(S.apply_St(g)) + beta * (x - x_prev)
    return x_new, x, alpha, beta, degenerate
