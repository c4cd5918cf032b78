from fsdcd.solvers.baselines import (
    admm_defaults,
    admm_step,
    alb_step,
    alb_t,
    alb_theta,
    cgne_solve,
    cgne_step,
    check_admm_params,
    init_admm,
    init_alb,
    init_cgne,
    lb_step,
    rsk_step,
    rska_step,
)
from fsdcd.solvers.driver import METHODS, SolveOptions, Trace, solve
from fsdcd.solvers.dual import (
    fsdcd_step,
    init_fsdcd,
    init_state,
    momentum_parameters,
    sdcd_step,
)
from fsdcd.solvers.smooth import SmoothFunction, hb_smooth_parameters, hb_smooth_step, least_squares
from fsdcd.solvers.state import SolverState, StepReport

__all__ = [
    "METHODS",
    "SmoothFunction",
    "SolveOptions",
    "SolverState",
    "StepReport",
    "Trace",
    "admm_defaults",
    "admm_step",
    "alb_step",
    "alb_t",
    "alb_theta",
    "cgne_solve",
    "cgne_step",
    "check_admm_params",
    "fsdcd_step",
    "hb_smooth_parameters",
    "hb_smooth_step",
    "init_admm",
    "init_alb",
    "init_cgne",
    "init_fsdcd",
    "init_state",
    "lb_step",
    "least_squares",
    "momentum_parameters",
    "rsk_step",
    "rska_step",
    "sdcd_step",
    "solve",
]
