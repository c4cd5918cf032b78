"""Strongly convex objectives, their conjugates, and Bregman distances.

Every solver in the package works on the dual image ``z = A^T lam`` and maps
back to the primal through ``x = grad f*(z)``; a :class:`ConjugatePair`
bundles what is needed for that round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def soft_threshold(x: np.ndarray, mu: float) -> np.ndarray:
    """Componentwise shrinkage ``max(|x_i| - mu, 0) * sign(x_i)``.

    This is the proximal map of ``mu * ||.||_1``.
    """
    if mu < 0:
        raise ValueError(f"threshold must be nonnegative, got {mu}")
    x = np.asarray(x, dtype=float)
    return np.maximum(np.abs(x) - mu, 0.0) * np.sign(x)


@dataclass(frozen=True)
class ConjugatePair:
    """A ``gamma``-strongly convex ``f`` together with ``f*`` and ``grad f*``.

    ``kind`` is one of ``"quadratic"``, ``"shifted_quadratic"`` or
    ``"elastic_net"``; ``params`` holds ``p``/``q`` or ``mu`` respectively.
    """

    gamma: float
    f: Callable[[np.ndarray], float]
    fstar: Callable[[np.ndarray], float]
    grad_fstar: Callable[[np.ndarray], np.ndarray]
    kind: str
    params: dict = field(default_factory=dict)

    def __repr__(self):
        extras = ", ".join(f"{k}={v!r}" for k, v in self.params.items() if np.isscalar(v))
        return f"ConjugatePair(kind={self.kind!r}, gamma={self.gamma}{', ' + extras if extras else ''})"


def make_quadratic() -> ConjugatePair:
    """``f(x) = ||x||^2 / 2``, self-conjugate, ``grad f* = id``."""
    return ConjugatePair(
        gamma=1.0,
        f=lambda x: 0.5 * float(np.dot(x, x)),
        fstar=lambda z: 0.5 * float(np.dot(z, z)),
        grad_fstar=lambda z: np.array(z, dtype=float),
        kind="quadratic",
    )


def make_shifted_quadratic(p, q: float = 0.0, gamma: float = 1.0) -> ConjugatePair:
    """``f(x) = gamma/2 ||x - p||^2 - q`` with ``f*(z) = ||z||^2/(2 gamma) + p.z + q``."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    p = np.array(p, dtype=float).reshape(-1)
    p.setflags(write=False)
    q = float(q)
    gamma = float(gamma)

    def f(x):
        r = x - p
        return 0.5 * gamma * float(np.dot(r, r)) - q

    def fstar(z):
        return float(np.dot(z, z)) / (2.0 * gamma) + float(np.dot(p, z)) + q

    def grad_fstar(z):
        return z / gamma + p

    return ConjugatePair(gamma, f, fstar, grad_fstar, "shifted_quadratic", {"p": p, "q": q})


def make_elastic_net(mu: float) -> ConjugatePair:
    """``f(x) = mu ||x||_1 + ||x||^2 / 2``.

    ``grad f*`` is soft thresholding and ``f*(z) = ||S_mu(z)||^2 / 2``.
    """
    if not mu > 0:
        raise ValueError(f"elastic-net weight mu must be positive, got {mu}")
    mu = float(mu)

    def f(x):
        return mu * float(np.abs(x).sum()) + 0.5 * float(np.dot(x, x))

    def fstar(z):
        s = soft_threshold(z, mu)
        return 0.5 * float(np.dot(s, s))

    return ConjugatePair(1.0, f, fstar, lambda z: soft_threshold(z, mu), "elastic_net", {"mu": mu})


def make_objective(kind: str, **params) -> ConjugatePair:
    """Build a pair by name, e.g. ``make_objective("elastic_net", mu=1.0)``."""
    if kind == "quadratic":
        return make_quadratic()
    if kind == "elastic_net":
        return make_elastic_net(params.get("mu", 1.0))
    if kind == "shifted_quadratic":
        return make_shifted_quadratic(params["p"], params.get("q", 0.0), params.get("gamma", 1.0))
    raise ValueError(f"unknown objective kind {kind!r}")


def bregman_distance_raw(f: ConjugatePair, z: np.ndarray, y: np.ndarray) -> float:
    """Signed ``f(y) + f*(z) - <z, y>``; may dip below zero by round-off."""
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    if z.shape != y.shape:
        raise ValueError(f"bregman_distance: shapes {z.shape} and {y.shape} differ")
    return f.f(y) + f.fstar(z) - float(np.dot(z, y))


def bregman_distance(f: ConjugatePair, z: np.ndarray, y: np.ndarray) -> float:
    """Bregman distance ``D_{f,z}(grad f*(z), y)``, clamped at zero."""
    return max(bregman_distance_raw(f, z, y), 0.0)
