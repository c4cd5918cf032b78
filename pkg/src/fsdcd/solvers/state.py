from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass
class SolverState:
    """Iterate of a dual method.

    ``x = grad f*(z)`` always holds for the dual methods.  ``z_prev`` and
    ``rho = (z - z_prev) . xhat`` feed the momentum step; ``aux`` carries
    method-specific extras (ALB's extrapolated point, ADMM's multiplier,
    CGNE's residual and search direction).
    """

    x: np.ndarray
    z: np.ndarray
    z_prev: np.ndarray | None = None
    rho: float = 0.0
    iter: int = 0
    rows_touched: int = 0
    aux: dict = field(default_factory=dict)

    def advance(self, **changes) -> "SolverState":
        return replace(self, **changes)


@dataclass(frozen=True)
class StepReport:
    alpha: float = 0.0
    beta: float = 0.0
    sampled_id: str = ""
    skipped: bool = False
    degenerate_fallback: bool = False


def check_finite(where: str, **arrays) -> None:
    for name, v in arrays.items():
        if not np.all(np.isfinite(v)):
            raise FloatingPointError(f"{where}: non-finite value in {name}")
