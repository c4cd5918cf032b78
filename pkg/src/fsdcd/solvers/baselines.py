"""Reference methods: linearized Bregman (plain and accelerated), linearized
ADMM, randomized sparse Kaczmarz (with averaging) and CGNE."""

from __future__ import annotations

import numpy as np

from fsdcd.convex import ConjugatePair, soft_threshold
from fsdcd.linalg import ProblemInstance
from fsdcd.solvers.state import SolverState, check_finite


def lb_step(problem: ProblemInstance, f: ConjugatePair, state: SolverState, alpha: float) -> SolverState:
    """Full-gradient dual step ``z <- z - alpha A^T (Ax - b)``."""
    A, b = problem.A, problem.b
    z = state.z - alpha * (A.T @ (A @ state.x - b))
    x = f.grad_fstar(z)
    check_finite("lb_step", z=z, x=x)
    return state.advance(x=x, z=z, z_prev=state.z, iter=state.iter + 1, rows_touched=state.rows_touched + A.shape[0])


def alb_theta(k: int) -> float:
    """``theta_{-1} = 1`` and ``theta_k = 2 / (k + 2)``."""
    return 1.0 if k < 0 else 2.0 / (k + 2)


def alb_t(k: int) -> float:
    """Extrapolation weight ``t_k = 1 + theta_{k+1} (1 / theta_k - 1)``."""
    return 1.0 + alb_theta(k + 1) * (1.0 / alb_theta(k) - 1.0)


def init_alb(problem: ProblemInstance, f: ConjugatePair) -> SolverState:
    z = np.zeros(problem.A.shape[1])
    return SolverState(x=f.grad_fstar(z), z=z, z_prev=z.copy(), aux={"z_tilde": z.copy()})


def alb_step(problem: ProblemInstance, f: ConjugatePair, state: SolverState, alpha: float) -> SolverState:
    """Nesterov-accelerated linearized Bregman.

    ``x' = grad f*(z~)``, ``z' = z~ - alpha A^T (A x' - b)`` and
    ``z~' = t_k z' + (1 - t_k) z`` with ``k = state.iter``.
    """
    A, b = problem.A, problem.b
    zt = state.aux["z_tilde"]
    x = f.grad_fstar(zt)
    z = zt - alpha * (A.T @ (A @ x - b))
    t = alb_t(state.iter)
    zt_new = t * z + (1.0 - t) * state.z
    check_finite("alb_step", z=z, x=x)
    return state.advance(
        x=x, z=z, z_prev=state.z, iter=state.iter + 1,
        rows_touched=state.rows_touched + A.shape[0], aux={"z_tilde": zt_new},
    )


def admm_defaults(problem: ProblemInstance) -> dict:
    return {"nu": 1.0 / np.linalg.norm(problem.A, 2) ** 2, "gamma": 0.99, "beta": 0.01}


def check_admm_params(problem: ProblemInstance, nu: float, gamma: float, beta: float) -> None:
    lhs = nu * np.linalg.norm(problem.A, 2) ** 2 + gamma
    if not (nu > 0 and gamma > 0 and beta > 0):
        raise ValueError("ADMM parameters nu, gamma, beta must be positive")
    if not lhs < 2.0:
        raise ValueError(f"ADMM parameters violate nu ||A||^2 + gamma < 2 (got {lhs:.6g})")


def init_admm(problem: ProblemInstance) -> SolverState:
    n = problem.A.shape[1]
    return SolverState(x=np.zeros(n), z=np.zeros(n), aux={"y": np.zeros(problem.A.shape[0])})


def admm_step(
    problem: ProblemInstance,
    state: SolverState,
    nu: float,
    gamma: float,
    beta: float,
    mu: float,
) -> SolverState:
    """Linearized ADMM for ``min mu ||x||_1 s.t. Ax = b``.

    ``x' = S_{nu mu}(x - nu A^T (Ax - b - y / beta))`` and
    ``y' = y - gamma beta (Ax' - b)``.  ``z`` stores the pre-shrinkage point.
    """
    A, b = problem.A, problem.b
    y = state.aux["y"]
    v = state.x - nu * (A.T @ (A @ state.x - b - y / beta))
    x = soft_threshold(v, nu * mu)
    y = y - gamma * beta * (A @ x - b)
    check_finite("admm_step", x=x, y=y)
    return state.advance(x=x, z=v, iter=state.iter + 1, rows_touched=state.rows_touched + A.shape[0], aux={"y": y})


def rska_step(
    problem: ProblemInstance,
    f: ConjugatePair,
    state: SolverState,
    J,
    weights=None,
    eta: int | None = None,
) -> SolverState:
    """Averaged sparse Kaczmarz with its constant step.

    ``z' = z - (1/eta) sum_{i in J} w_i (a_i.x - b_i) / ||a_i||^2 a_i``,
    ``x' = grad f*(z')``.  ``J = [i]`` with unit weight is plain RSK.
    """
    J = np.atleast_1d(np.asarray(J, dtype=int))
    eta = len(J) if eta is None else int(eta)
    w = np.ones(len(J)) if weights is None else np.asarray(weights, dtype=float)
    AJ = problem.A[J]
    coef = w * (AJ @ state.x - problem.b[J]) / np.sum(AJ**2, axis=1)
    z = state.z - (AJ.T @ coef) / eta
    x = f.grad_fstar(z)
    check_finite("rska_step", z=z, x=x)
    return state.advance(x=x, z=z, z_prev=state.z, iter=state.iter + 1, rows_touched=state.rows_touched + len(J))


def rsk_step(problem: ProblemInstance, f: ConjugatePair, state: SolverState, i: int) -> SolverState:
    return rska_step(problem, f, state, [i])


def init_cgne(problem: ProblemInstance, x1: np.ndarray, shift: np.ndarray | None = None) -> SolverState:
    """Start CGNE at ``x1``: ``r = A x1 - b``, ``p = -A^T r``.

    ``shift`` is the centre of ``||x - shift||^2 / 2`` so that ``z = x - shift``
    is the matching dual image.
    """
    A, b = problem.A, problem.b
    x1 = np.array(x1, dtype=float)
    r = A @ x1 - b
    z1 = x1 - shift if shift is not None else x1.copy()
    return SolverState(x=x1, z=z1, aux={"r": r, "p": -(A.T @ r), "eta": np.nan, "eta_dual": np.nan},
                       rows_touched=A.shape[0])


def cgne_step(problem: ProblemInstance, state: SolverState) -> SolverState:
    """One CGNE iteration; a vanishing search direction returns the state as is."""
    A = problem.A
    r, p = state.aux["r"], state.aux["p"]
    pp = float(np.dot(p, p))
    rr = float(np.dot(r, r))
    if pp == 0.0 or rr == 0.0:
        return state.advance(iter=state.iter + 1, aux={**state.aux, "breakdown": True})
    delta = rr / pp
    x = state.x + delta * p
    r_new = r + delta * (A @ p)
    g = A.T @ r_new
    eta = float(np.dot(r_new, r_new)) / rr
    eta_dual = float(np.dot(g, p)) / pp
    p_new = -g + eta * p
    check_finite("cgne_step", x=x, r=r_new)
    return state.advance(
        x=x, z=state.z + delta * p, iter=state.iter + 1, rows_touched=state.rows_touched + A.shape[0],
        aux={"r": r_new, "p": p_new, "delta": delta, "eta": eta, "eta_dual": eta_dual},
    )


def cgne_solve(problem: ProblemInstance, x1: np.ndarray, iters: int) -> tuple[list[np.ndarray], list[dict]]:
    """Run ``iters`` CGNE iterations from ``x1``.

    Returns the iterates ``[x1, x2, ...]`` and per-step diagnostics holding
    ``delta``, ``eta`` (``||r'||^2 / ||r||^2``) and ``eta_dual``
    (``<A^T r', p> / ||p||^2``).  Stops early on breakdown.
    """
    state = init_cgne(problem, x1)
    xs, info = [state.x], []
    for _ in range(iters):
        state = cgne_step(problem, state)
        if state.aux.get("breakdown"):
            break
        xs.append(state.x)
        info.append({k: state.aux[k] for k in ("delta", "eta", "eta_dual")})
    return xs, info
