"""Dense kernels, test-matrix generators and spectral helpers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

FAMILIES = ("gaussian", "bernoulli", "subsampled_hadamard", "custom")

# singular values below this fraction of sigma_1 are treated as zero
RANK_RTOL = 1e-10


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``, e.g. one per trial."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def _check_dims(m, n):
    if int(m) < 1 or int(n) < 1:
        raise ValueError(f"dimensions must be positive, got m={m}, n={n}")


def gen_gaussian(m: int, n: int, seed: int) -> np.ndarray:
    """m x n matrix with i.i.d. standard normal entries."""
    _check_dims(m, n)
    return np.random.default_rng(seed).standard_normal((m, n))


def gen_bernoulli(m: int, n: int, seed: int) -> np.ndarray:
    """m x n matrix with i.i.d. entries uniform on {+1, -1}."""
    _check_dims(m, n)
    rng = np.random.default_rng(seed)
    return np.where(rng.integers(0, 2, size=(m, n)) == 1, 1.0, -1.0)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def gen_subsampled_hadamard(m: int, n: int, seed: int) -> np.ndarray:
    """m rows, drawn without replacement, of the orthonormal n x n Hadamard matrix.

    ``n`` must be a power of two (Sylvester construction).
    """
    _check_dims(m, n)
    if not is_power_of_two(n):
        raise ValueError(
            f"subsampled Hadamard needs n to be a power of two, got n={n} "
            f"(nearest admissible: {next_power_of_two(n)})"
        )
    if m > n:
        raise ValueError(f"cannot draw m={m} distinct rows from a {n}x{n} Hadamard matrix")
    rng = np.random.default_rng(seed)
    rows = np.sort(rng.choice(n, size=m, replace=False))
    H = scipy.linalg.hadamard(n, dtype=float) / np.sqrt(n)
    return H[rows]


def gen_sparse_signal(n: int, s: int, seed: int) -> np.ndarray:
    """Vector with ``s`` standard normal entries at uniformly random positions."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    rng = np.random.default_rng(seed)
    x = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    vals = rng.standard_normal(s)
    # a continuous draw is nonzero with probability one, but keep the count exact
    vals[vals == 0.0] = 1.0
    x[support] = vals
    return x


def matvec(A: np.ndarray, x: np.ndarray) -> np.ndarray:
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"matvec: A is {A.shape}, x has length {x.shape[0]}")
    return A @ x


def rmatvec(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    if A.shape[0] != y.shape[0]:
        raise ValueError(f"rmatvec: A is {A.shape}, y has length {y.shape[0]}")
    return A.T @ y


def row_block(A: np.ndarray, idx: Sequence[int]) -> np.ndarray:
    idx = np.asarray(idx, dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= A.shape[0]):
        raise ValueError(f"row indices out of range for a matrix with {A.shape[0]} rows")
    return A[idx]


def spectral_norms(A: np.ndarray) -> tuple[float, float]:
    """Largest and smallest nonzero singular values of ``A``."""
    sv = np.linalg.svd(np.atleast_2d(A), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise ValueError("spectral_norms: zero matrix has no nonzero singular value")
    nonzero = sv[sv > RANK_RTOL * sv[0]]
    return float(sv[0]), float(nonzero[-1])


@dataclass(frozen=True)
class ProblemInstance:
    """A consistent linear system ``Ax = b`` with an optional planted solution."""

    A: np.ndarray
    b: np.ndarray
    solution: np.ndarray | None = None
    family: str = "custom"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2:
            raise ValueError("A must be two-dimensional")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("problem data must be finite")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.solution is not None:
            x = np.array(self.solution, dtype=float).reshape(-1)
            if x.shape[0] != A.shape[1]:
                raise ValueError(f"solution has length {x.shape[0]}, expected {A.shape[1]}")
            gap = np.linalg.norm(A @ x - b)
            if gap > 1e-10 * (1.0 + np.linalg.norm(b)):
                raise ValueError(f"inconsistent planted solution: ||Ax - b|| = {gap:.3e}")
            x.setflags(write=False)
            object.__setattr__(self, "solution", x)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def make_problem(family: str, m: int, n: int, s: int, seed: int) -> ProblemInstance:
    """Planted ``s``-sparse recovery problem with ``b = A x``.

    For the Hadamard family ``n`` is rounded up to a power of two; the actual
    size is recorded in ``meta``.
    """
    gens = {
        "gaussian": gen_gaussian,
        "bernoulli": gen_bernoulli,
        "subsampled_hadamard": gen_subsampled_hadamard,
    }
    if family not in gens:
        raise ValueError(f"cannot generate family {family!r}; choose from {sorted(gens)}")
    meta = {"m": int(m), "n_requested": int(n)}
    if family == "subsampled_hadamard" and not is_power_of_two(n):
        n = next_power_of_two(n)
    meta["n"] = int(n)
    meta["s"] = int(s)
    # separate streams so the signal does not depend on the matrix family
    ss = np.random.SeedSequence(int(seed)).spawn(2)
    A = gens[family](m, n, int(ss[0].generate_state(1, dtype=np.uint64)[0]))
    x = gen_sparse_signal(n, s, int(ss[1].generate_state(1, dtype=np.uint64)[0]))
    return ProblemInstance(A=A, b=A @ x, solution=x, family=family, seed=int(seed), meta=meta)
