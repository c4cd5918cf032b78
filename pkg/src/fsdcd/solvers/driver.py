"""Run loop shared by every method: stopping rules, epochs and traces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from fsdcd.convex import ConjugatePair, bregman_distance
from fsdcd.linalg import ProblemInstance
from fsdcd.metrics import TraceRecord, rse
from fsdcd.sampling import SamplingSpace, SingleRow
from fsdcd.solvers import baselines as bl
from fsdcd.solvers.dual import fsdcd_step, init_fsdcd, init_state, sdcd_step
from fsdcd.solvers.state import SolverState, StepReport

METHODS = ("sdcd", "fsdcd", "lb", "alb", "admm", "rsk", "rska", "cgne")

SpaceLike = Union[SamplingSpace, Callable[[int], SamplingSpace]]


@dataclass
class SolveOptions:
    zeta: float = 1.0
    max_epochs: float = 1000.0
    max_iters: int | None = None
    rse_tol: float = 1e-12
    residual_tol: float = 1e-12
    record_trace: bool = True
    trace_limit: int = 10_000
    # periodic rho <- (z - z_prev).xhat; test mode only, needs a planted solution
    resync_every: int | None = None

    def __post_init__(self):
        if not 0.0 < self.zeta < 2.0:
            raise ValueError(f"zeta must lie in (0, 2), got {self.zeta}")
        if self.rse_tol < 0 or self.residual_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.max_epochs <= 0:
            raise ValueError("max_epochs must be positive")


@dataclass
class Trace:
    method: str
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]


def _unsupported(method, f):
    raise ValueError(f"{method} needs a quadratic objective, got {f.kind!r}")


def _make_stepper(method: str, problem: ProblemInstance, f: ConjugatePair, space, options, rng, params):
    """``(initial state, step(state, k) -> (state, report))`` for ``method``."""
    A = problem.A
    m = A.shape[0]

    def space_at(k):
        sp = space(k) if callable(space) and not isinstance(space, SamplingSpace) else space
        return sp

    if method == "sdcd":
        state = init_state(problem, f, params.get("z0"))

        def step(st, k):
            return sdcd_step(problem, f, st, space_at(k).draw(rng), options.zeta)

    elif method == "fsdcd":
        state = init_state(problem, f, params.get("z0"))

        def step(st, k):
            if k == 0:
                # momentum start z1 = z0 + A^T xi0, after x0 has been recorded
                st = init_fsdcd(problem, f, st.z, params.get("xi0"), rng)
            return fsdcd_step(problem, f, st, space_at(k).draw(rng))

    elif method == "lb":
        alpha = params.get("step", 1.0 / np.linalg.norm(A, 2) ** 2)
        state = init_state(problem, f)

        def step(st, k):
            return bl.lb_step(problem, f, st, alpha), StepReport(alpha=alpha)

    elif method == "alb":
        alpha = params.get("step", 2.0 / np.linalg.norm(A, 2) ** 2)
        state = bl.init_alb(problem, f)

        def step(st, k):
            return bl.alb_step(problem, f, st, alpha), StepReport(alpha=alpha)

    elif method == "admm":
        p = {**bl.admm_defaults(problem), **{k: params[k] for k in ("nu", "gamma", "beta") if k in params}}
        bl.check_admm_params(problem, p["nu"], p["gamma"], p["beta"])
        mu = params.get("mu", f.params.get("mu", 0.0))
        state = bl.init_admm(problem)

        def step(st, k):
            return bl.admm_step(problem, st, p["nu"], p["gamma"], p["beta"], mu), StepReport(alpha=p["nu"])

    elif method in ("rsk", "rska"):
        eta = 1 if method == "rsk" else int(params.get("eta", 4))
        if not 1 <= eta <= m:
            raise ValueError(f"rska: need 1 <= eta <= m, got {eta}")
        weights = params.get("weights")
        weights = None if weights is None else np.asarray(weights, dtype=float)
        rows = SingleRow.row_norms(A)
        state = init_state(problem, f)

        def step(st, k):
            if eta == 1:
                J = rows.draw(rng).rows
            else:
                J = np.sort(rng.choice(m, size=eta, replace=False))
            w = None if weights is None else weights[J]
            return bl.rska_step(problem, f, st, J, w, eta), StepReport(alpha=1.0 / eta, sampled_id=str(J.tolist()))

    elif method == "cgne":
        if f.kind not in ("quadratic", "shifted_quadratic"):
            _unsupported(method, f)
        shift = f.params.get("p")
        x1 = params.get("x1", f.grad_fstar(np.zeros(A.shape[1])))
        state = bl.init_cgne(problem, x1, shift)

        def step(st, k):
            st = bl.cgne_step(problem, st)
            return st, StepReport(alpha=st.aux.get("delta", 0.0), beta=st.aux.get("eta", 0.0),
                                  skipped=bool(st.aux.get("breakdown")))

    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return state, step


def solve(
    problem: ProblemInstance,
    f: ConjugatePair,
    space: SpaceLike | None = None,
    options: SolveOptions | None = None,
    rng: np.random.Generator | int | None = None,
    method: str = "sdcd",
    **params,
) -> tuple[SolverState, Trace]:
    """Iterate ``method`` until the stopping rule fires or the budget runs out.

    With a planted solution the rule is ``rse <= options.rse_tol``; otherwise
    ``||Ax - b|| / (1 + ||b||) <= options.residual_tol``, checked about once
    per epoch.  ``space`` (default: rows drawn proportionally to their
    squared norms) may also be a callable ``k -> SamplingSpace``.  Running out
    of budget is not an error: the returned trace has ``converged = False``.
    """
    options = options or SolveOptions()
    rng = np.random.default_rng(rng)
    A, b = problem.A, problem.b
    m = A.shape[0]
    xhat = problem.solution
    b_norm = float(np.linalg.norm(b))
    if space is None:
        space = SingleRow.row_norms(A)
    state, step = _make_stepper(method, problem, f, space, options, rng, params)

    trace = Trace(method)
    max_iters = options.max_iters if options.max_iters is not None else math.inf
    # ADMM iterates are not of the form x = grad f*(z)
    has_pairing = xhat is not None and method != "admm"
    full_matrix = method in ("lb", "alb", "admm", "cgne")
    residual_every = 1
    stride = 1
    last_residual_at = -1

    def residual(st):
        return float(np.linalg.norm(A @ st.x - b))

    def record(st, rep, res):
        trace.records.append(
            TraceRecord(
                iter=st.iter,
                epochs=st.rows_touched / m,
                rse=rse(st.x, xhat) if xhat is not None else math.nan,
                bregman=bregman_distance(f, st.z, xhat) if has_pairing else math.nan,
                residual_norm=res,
                alpha=rep.alpha,
                beta=rep.beta,
                skipped=rep.skipped,
            )
        )

    def done(st, res):
        if xhat is not None:
            return rse(st.x, xhat) <= options.rse_tol
        return not math.isnan(res) and res / (1.0 + b_norm) <= options.residual_tol

    res0 = residual(state)
    record(state, StepReport(), res0)
    if done(state, res0):
        trace.converged = True
        return state, trace

    while state.rows_touched / m < options.max_epochs and state.iter < max_iters:
        rows_before = state.rows_touched
        state, rep = step(state, state.iter)
        k = state.iter
        if k <= 2:
            # size the residual check and trace thinning from one step's cost;
            # the second step is used because the first may include set-up work
            per_iter = max(state.rows_touched - rows_before, 1)
            residual_every = 1 if full_matrix else max(1, math.ceil(m / per_iter))
            est_iters = min(max_iters, options.max_epochs * m / per_iter)
            stride = max(1, math.ceil(est_iters / options.trace_limit))
        if options.resync_every and xhat is not None and k % options.resync_every == 0:
            state = state.advance(rho=float(np.dot(state.z - state.z_prev, xhat)))
        res = math.nan
        if full_matrix or k - last_residual_at >= residual_every:
            res = residual(state)
            last_residual_at = k
        finished = done(state, res)
        out_of_budget = state.rows_touched / m >= options.max_epochs or k >= max_iters
        if options.record_trace and (k <= options.trace_limit or k % stride == 0 or finished or out_of_budget):
            if math.isnan(res) and (finished or out_of_budget):
                res = residual(state)
            record(state, rep, res)
        if finished:
            trace.converged = True
            break
        if rep.skipped and method == "cgne":
            break
    if not options.record_trace or trace.records[-1].iter != state.iter:
        record(state, StepReport(), residual(state))
    return state, trace
