"""Stochastic dual coordinate descent and its adaptive heavy-ball variant.

Both methods act on ``z = A^T lam`` and recover ``x = grad f*(z)``.  A step
draws a sketch ``S``, forms ``d = A^T S S^T (Ax - b)`` and moves
``z <- z - alpha d (+ beta (z - z_prev))``.
"""

from __future__ import annotations

import numpy as np

from fsdcd.convex import ConjugatePair
from fsdcd.linalg import ProblemInstance
from fsdcd.sampling import EPS_RES, SampleOperator
from fsdcd.solvers.state import SolverState, StepReport, check_finite

# Cauchy-Schwarz gap below EPS_GRAM * ||d||^2 ||dz||^2 means d and dz are parallel
EPS_GRAM = 1e-12


def _sketched_residual(problem: ProblemInstance, x: np.ndarray, S: SampleOperator):
    SA, Sb = S.sketch(problem.A, problem.b)
    return SA, Sb, SA @ x - Sb


def _is_zero_residual(s: np.ndarray, problem: ProblemInstance) -> bool:
    return float(np.linalg.norm(s)) <= EPS_RES * (1.0 + float(np.linalg.norm(problem.b)))


def init_state(problem: ProblemInstance, f: ConjugatePair, z0: np.ndarray | None = None) -> SolverState:
    """Starting point ``z0`` (default 0, which lies in Range(A^T))."""
    z = np.zeros(problem.A.shape[1]) if z0 is None else np.array(z0, dtype=float)
    return SolverState(x=f.grad_fstar(z), z=z, z_prev=z.copy())


def sdcd_step(
    problem: ProblemInstance,
    f: ConjugatePair,
    state: SolverState,
    S: SampleOperator,
    zeta: float = 1.0,
) -> tuple[SolverState, StepReport]:
    """One step with the adaptive size ``alpha = (2 - zeta) * L_adap``.

    ``L_adap = gamma ||S^T r||^2 / ||A^T S S^T r||^2`` with ``r = Ax - b``; a
    zero sketched residual leaves the state untouched.
    """
    if not 0.0 < zeta < 2.0:
        raise ValueError(f"relaxation parameter must lie in (0, 2), got {zeta}")
    SA, _, s = _sketched_residual(problem, state.x, S)
    touched = state.rows_touched + S.rows_touched
    if _is_zero_residual(s, problem):
        return (
            state.advance(iter=state.iter + 1, rows_touched=touched),
            StepReport(sampled_id=S.description, skipped=True),
        )
    d = SA.T @ s
    L = f.gamma * float(np.dot(s, s)) / float(np.dot(d, d))
    alpha = (2.0 - zeta) * L
    z = state.z - alpha * d
    x = f.grad_fstar(z)
    check_finite("sdcd_step", z=z, x=x)
    new = state.advance(x=x, z=z, z_prev=state.z, rho=0.0, iter=state.iter + 1, rows_touched=touched)
    return new, StepReport(alpha=alpha, sampled_id=S.description)


def init_fsdcd(
    problem: ProblemInstance,
    f: ConjugatePair,
    z0: np.ndarray | None = None,
    xi0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> SolverState:
    """Momentum start ``z1 = z0 + A^T xi0`` with ``rho1 = xi0 . b``.

    Without an explicit ``xi0`` a random direction of length
    ``1e-2 ||b|| / ||A||_F`` is drawn, keeping ``x1`` close to ``x0``.  Pass
    ``xi0 = 0`` to make the first step a plain SDCD step.
    """
    A, b = problem.A, problem.b
    m, n = A.shape
    z0 = np.zeros(n) if z0 is None else np.array(z0, dtype=float)
    if xi0 is None:
        rng = np.random.default_rng(rng)
        u = rng.standard_normal(m)
        u /= np.linalg.norm(u)
        xi0 = 1e-2 * np.linalg.norm(b) / np.linalg.norm(A) * u
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (m,):
        raise ValueError(f"xi0 must have length m={m}, got shape {xi0.shape}")
    if not np.any(xi0):
        return SolverState(x=f.grad_fstar(z0), z=z0, z_prev=z0.copy(), rho=0.0)
    z1 = z0 + A.T @ xi0
    return SolverState(x=f.grad_fstar(z1), z=z1, z_prev=z0, rho=float(xi0 @ b), rows_touched=m)


def momentum_parameters(
    s2: float,
    d: np.ndarray,
    dz: np.ndarray,
    x: np.ndarray,
    rho: float,
    gamma: float,
) -> tuple[float, float, bool]:
    """Minimiser ``(alpha, beta)`` of the quadratic majoriser of the dual step.

    ``s2 = ||S^T r||^2`` equals ``d . (x - xhat)`` and ``rho`` stands in for
    ``dz . xhat``, so ``xhat`` itself is never needed.  The third value flags
    a (near) singular 2x2 system, in which case the SDCD step with
    ``zeta = 1`` and ``beta = 0`` is returned.
    """
    dd = float(np.dot(d, d))
    zz = float(np.dot(dz, dz))
    dzd = float(np.dot(d, dz))
    det = dd * zz - dzd * dzd
    if dd == 0.0:
        return 0.0, 0.0, True
    if zz == 0.0 or det <= EPS_GRAM * dd * zz:
        return gamma * s2 / dd, 0.0, True
    w = float(np.dot(dz, x)) - rho  # dz . (x - xhat)
    alpha = gamma * (s2 * zz - dzd * w) / det
    beta = gamma * (dzd * s2 - dd * w) / det
    return alpha, beta, False


def fsdcd_step(
    problem: ProblemInstance,
    f: ConjugatePair,
    state: SolverState,
    S: SampleOperator,
) -> tuple[SolverState, StepReport]:
    """One adaptive heavy-ball step; ``state`` must come from :func:`init_fsdcd`."""
    SA, Sb, s = _sketched_residual(problem, state.x, S)
    touched = state.rows_touched + S.rows_touched
    if _is_zero_residual(s, problem):
        return (
            state.advance(iter=state.iter + 1, rows_touched=touched),
            StepReport(sampled_id=S.description, skipped=True, degenerate_fallback=True),
        )
    d = SA.T @ s
    dz = state.z - state.z_prev
    alpha, beta, degenerate = momentum_parameters(float(np.dot(s, s)), d, dz, state.x, state.rho, f.gamma)
    z = state.z - alpha * d + beta * dz
    rho = -alpha * float(np.dot(s, Sb)) + beta * state.rho
    x = f.grad_fstar(z)
    check_finite("fsdcd_step", z=z, x=x, rho=rho)
    new = state.advance(x=x, z=z, z_prev=state.z, rho=rho, iter=state.iter + 1, rows_touched=touched)
    return new, StepReport(alpha=alpha, beta=beta, sampled_id=S.description, degenerate_fallback=degenerate)
