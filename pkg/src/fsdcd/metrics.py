"""Convergence diagnostics and the linear-rate certificate for quadratic objectives."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from fsdcd.convex import ConjugatePair
from fsdcd.linalg import spectral_norms
from fsdcd.sampling import SamplingSpace


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    epochs: float
    rse: float
    bregman: float
    residual_norm: float
    alpha: float = 0.0
    beta: float = 0.0
    skipped: bool = False

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def rse(x: np.ndarray, xhat: np.ndarray) -> float:
    """Relative solution error ``||x - xhat||^2 / ||xhat||^2``."""
    nrm = float(np.dot(xhat, xhat))
    if nrm == 0.0:
        raise ValueError("rse: reference solution is zero")
    e = np.asarray(x) - xhat
    return float(np.dot(e, e)) / nrm


def nu_quadratic(A: np.ndarray) -> float:
    """``2 sigma_min(A)^2``, the error-bound constant for ``f = ||x||^2 / 2``."""
    return 2.0 * spectral_norms(A)[1] ** 2


@dataclass(frozen=True)
class RateCertificate:
    gamma: float
    zeta: float
    nu: float
    lambda_min_H: float
    lambda_max_k: float
    contraction_factor: float
    method: str = "sdcd"


def contraction_factor(gamma, zeta, nu, lambda_min_H, lambda_max_k, method="sdcd") -> float:
    relax = 1.0 if method == "fsdcd" else zeta * (2.0 - zeta)
    return 1.0 - gamma * relax * nu * lambda_min_H / (2.0 * lambda_max_k)


def rate_certificate(
    f: ConjugatePair,
    A: np.ndarray,
    space: SamplingSpace,
    zeta: float = 1.0,
    method: str = "sdcd",
) -> RateCertificate:
    """Per-iteration expected contraction of the Bregman distance.

    ``1 - gamma zeta(2 - zeta) nu lambda_min(H) / (2 lambda_max)``; the
    momentum method uses ``zeta(2 - zeta) = 1``.  Only available for the
    plain quadratic, the one objective with a closed-form ``nu``.
    """
    if f.kind != "quadratic":
        raise ValueError(f"rate certificate: nu unavailable for objective {f.kind!r} (quadratic only)")
    if method not in ("sdcd", "fsdcd"):
        raise ValueError(f"rate certificate: unknown method {method!r}")
    if not 0.0 < zeta < 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2), got {zeta}")
    nu = nu_quadratic(A)
    lam_min = float(np.linalg.eigvalsh(space.expected_gram())[0])
    lam_max = float(space.lambda_max_bound(A))
    factor = contraction_factor(f.gamma, zeta, nu, lam_min, lam_max, method)
    return RateCertificate(f.gamma, zeta, nu, lam_min, lam_max, factor, method)


def _column(traces, name):
    length = min(len(t) for t in traces)
    return np.array([[getattr(rec, name) for rec in t[:length]] for t in traces])


def empirical_contraction(traces: Sequence[Sequence[TraceRecord]]) -> np.ndarray:
    """Trial-averaged ratio ``mean D_{k+1} / mean D_k`` per iteration.

    Traces are truncated to the shortest one; a zero mean gives ``nan``.
    """
    if not traces:
        raise ValueError("empirical_contraction: no traces")
    mean = _column(traces, "bregman").mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = mean[1:] / mean[:-1]
    ratio[mean[:-1] == 0.0] = np.nan
    return ratio


def epochs_to_tolerance(trace: Sequence[TraceRecord], tol: float) -> float:
    """Epoch count of the first record with ``rse <= tol`` (``inf`` if none)."""
    for rec in trace:
        if rec.rse <= tol:
            return rec.epochs
    return float("inf")
