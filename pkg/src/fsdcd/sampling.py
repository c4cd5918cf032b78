"""Distributions over sketching matrices ``S`` and their second moments.

A sampling space is drawn once per iteration and yields a matrix-free
:class:`SampleOperator`.  Discrete spaces can enumerate their atoms, which
gives exact values for ``H = E[S S^T]`` and ``sup lambda_max(A^T S S^T A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

# ||S^T r|| below EPS_RES * (1 + ||b||) counts as an exact zero
EPS_RES = 1e-14

_SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class SampleOperator:
    """A drawn sketch ``S`` (``m x q``), stored by structure rather than densely.

    Row selectors keep ``rows`` and an optional per-row scaling ``weights``
    (``S = I[:, rows] diag(weights)``).  ``dense`` holds an explicit
    ``m x q`` matrix (Gaussian sketches).  With all three unset, ``S = I``.
    """

    m: int
    rows: np.ndarray | None = None
    weights: np.ndarray | None = None
    dense: np.ndarray | None = None
    description: str = ""

    @property
    def q(self) -> int:
        if self.dense is not None:
            return self.dense.shape[1]
        return self.m if self.rows is None else len(self.rows)

    @property
    def rows_touched(self) -> int:
        """Rows of ``A`` read when forming ``S^T A`` (epoch accounting)."""
        return self.m if self.rows is None else len(self.rows)

    @property
    def frobenius_sq(self) -> float:
        if self.dense is not None:
            return float(np.sum(self.dense**2))
        if self.weights is not None:
            return float(np.sum(self.weights**2))
        return float(self.q)

    def apply_St(self, v: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense.T @ v
        if self.rows is None:
            return np.array(v, dtype=float)
        out = v[self.rows]
        return out * self.weights if self.weights is not None else out

    def apply_S(self, u: np.ndarray) -> np.ndarray:
        if self.dense is not None:
            return self.dense @ u
        if self.rows is None:
            return np.array(u, dtype=float)
        out = np.zeros(self.m)
        out[self.rows] = u * self.weights if self.weights is not None else u
        return out

    def sketch(self, A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(S^T A, S^T b)`` without materialising ``S``."""
        if self.dense is not None:
            return self.dense.T @ A, self.dense.T @ b
        if self.rows is None:
            return A, b
        SA, Sb = A[self.rows], b[self.rows]
        if self.weights is not None:
            SA = SA * self.weights[:, None]
            Sb = Sb * self.weights
        return SA, Sb

    def gram_diag(self) -> np.ndarray | None:
        """Diagonal of ``S S^T`` for row selectors, ``None`` for dense sketches."""
        if self.dense is not None:
            return None
        d = np.zeros(self.m)
        if self.rows is None:
            d[:] = 1.0
        else:
            d[self.rows] = 1.0 if self.weights is None else self.weights**2
        return d


def _check_simplex(p: np.ndarray, size: int, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape[0] != size:
        raise ValueError(f"{what}: expected {size} probabilities, got {p.shape[0]}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError(f"{what}: probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > _SIMPLEX_TOL:
        raise ValueError(f"{what}: probabilities sum to {p.sum():.15g}, not 1")
    p.setflags(write=False)
    return p


class SamplingSpace:
    """Base class; subclasses set ``m`` and ``bounded``."""

    m: int
    bounded: bool = True

    def draw(self, rng: np.random.Generator) -> SampleOperator:
        raise NotImplementedError

    def atoms(self) -> list[tuple[float, SampleOperator]]:
        """``(probability, operator)`` pairs; only for discrete spaces."""
        raise NotImplementedError(f"{type(self).__name__} is not a discrete space")

    def expected_gram(self) -> np.ndarray:
        H = np.zeros(self.m)
        for p, S in self.atoms():
            H += p * S.gram_diag()
        return np.diag(H)

    def lambda_max_bound(self, A: np.ndarray) -> float:
        return max(_lambda_max_atom(A, S) for p, S in self.atoms() if p > 0)

    def check_assumption(self, rtol: float = 1e-12) -> bool:
        """Positive definiteness of ``H`` (needed for linear convergence)."""
        ev = np.linalg.eigvalsh(self.expected_gram())
        return bool(ev[0] > rtol * max(ev[-1], 1e-300))


def _lambda_max_atom(A: np.ndarray, S: SampleOperator) -> float:
    SA, _ = S.sketch(A, np.zeros(A.shape[0]))
    if SA.shape[0] == 1:
        return float(np.dot(SA[0], SA[0]))
    return float(np.linalg.norm(SA, 2) ** 2)


class SingleRow(SamplingSpace):
    """``S = e_i`` with ``P(i) = probabilities[i]``."""

    def __init__(self, probabilities: Sequence[float]):
        p = np.asarray(probabilities, dtype=float)
        self.m = p.shape[0]
        self.probabilities = _check_simplex(p, self.m, "single_row")
        self._cdf = np.cumsum(self.probabilities)

    @classmethod
    def uniform(cls, m: int) -> "SingleRow":
        return cls(np.full(m, 1.0 / m))

    @classmethod
    def row_norms(cls, A: np.ndarray) -> "SingleRow":
        """Probabilities proportional to ``||a_i||^2``."""
        w = np.sum(np.asarray(A, dtype=float) ** 2, axis=1)
        return cls(w / w.sum())

    def _index(self, rng):
        i = int(np.searchsorted(self._cdf, rng.random() * self._cdf[-1], side="right"))
        return min(i, self.m - 1)

    def draw(self, rng):
        i = self._index(rng)
        while self.probabilities[i] == 0.0:  # cdf plateaus can only be hit by round-off
            i = self._index(rng)
        return SampleOperator(self.m, rows=np.array([i]), description=f"row {i}")

    def atoms(self):
        return [
            (float(p), SampleOperator(self.m, rows=np.array([i]), description=f"row {i}"))
            for i, p in enumerate(self.probabilities)
        ]

    def expected_gram(self):
        return np.diag(np.array(self.probabilities))

    def lambda_max_bound(self, A):
        norms = np.sum(np.asarray(A) ** 2, axis=1)
        return float(norms[self.probabilities > 0].max())


class BlockPartition(SamplingSpace):
    """``S = I[:, I_j]`` for a partition ``{I_j}`` of the rows, block ``j`` w.p. ``p_j``."""

    def __init__(self, blocks: Sequence[Sequence[int]], probabilities: Sequence[float], m: int | None = None):
        blocks = [np.asarray(sorted(int(i) for i in blk), dtype=int) for blk in blocks]
        if any(len(blk) == 0 for blk in blocks):
            raise ValueError("block_partition: empty block")
        flat = np.concatenate(blocks)
        self.m = int(m) if m is not None else int(flat.max()) + 1
        if len(flat) != self.m or not np.array_equal(np.sort(flat), np.arange(self.m)):
            raise ValueError("block_partition: blocks must be disjoint and cover all rows")
        for blk in blocks:
            blk.setflags(write=False)
        self.blocks = blocks
        self.probabilities = _check_simplex(probabilities, len(blocks), "block_partition")
        self._cdf = np.cumsum(self.probabilities)

    @classmethod
    def from_matrix(cls, A: np.ndarray, tau: int, rng: np.random.Generator) -> "BlockPartition":
        """Random partition into blocks of size ``tau``, picked by Frobenius weight."""
        blocks = row_partition(A.shape[0], tau, rng)
        return cls(blocks, block_probabilities(A, blocks), m=A.shape[0])

    def draw(self, rng):
        j = min(int(np.searchsorted(self._cdf, rng.random() * self._cdf[-1], side="right")), len(self.blocks) - 1)
        while self.probabilities[j] == 0.0:
            j = min(int(np.searchsorted(self._cdf, rng.random() * self._cdf[-1], side="right")), len(self.blocks) - 1)
        return SampleOperator(self.m, rows=self.blocks[j], description=f"block {j}")

    def atoms(self):
        return [
            (float(p), SampleOperator(self.m, rows=blk, description=f"block {j}"))
            for j, (p, blk) in enumerate(zip(self.probabilities, self.blocks))
        ]


class WeightedBlock(SamplingSpace):
    """``S = I[:, J] diag(sqrt(w_i) / ||a_i||)`` with ``J`` a uniform ``eta``-subset.

    With ``eta = 1`` and unit weights the induced update is the Kaczmarz
    projection onto the sampled row's hyperplane.
    """

    def __init__(self, row_norms: Sequence[float], eta: int, weights: Sequence[float] | None = None):
        self.row_norms = np.asarray(row_norms, dtype=float)
        self.m = self.row_norms.shape[0]
        if not 1 <= eta <= self.m:
            raise ValueError(f"weighted_block: need 1 <= eta <= m, got eta={eta}, m={self.m}")
        if np.any(self.row_norms <= 0):
            raise ValueError("weighted_block: zero rows cannot be normalised")
        self.eta = int(eta)
        w = np.ones(self.m) if weights is None else np.asarray(weights, dtype=float)
        if w.shape[0] != self.m or np.any(w < 0) or np.any(w > 1):
            raise ValueError("weighted_block: weights must lie in [0, 1], one per row")
        self.weights = w
        self._scale = np.sqrt(w) / self.row_norms

    @classmethod
    def from_matrix(cls, A, eta, weights=None):
        return cls(np.linalg.norm(A, axis=1), eta, weights)

    def _op(self, J):
        J = np.sort(np.asarray(J, dtype=int))
        return SampleOperator(self.m, rows=J, weights=self._scale[J], description=f"rows {J.tolist()}")

    def draw(self, rng):
        return self._op(rng.choice(self.m, size=self.eta, replace=False))

    def n_atoms(self) -> int:
        return math.comb(self.m, self.eta)

    def atoms(self):
        if self.n_atoms() > 100_000:
            raise ValueError(f"weighted_block: {self.n_atoms()} subsets are too many to enumerate")
        p = 1.0 / self.n_atoms()
        return [(p, self._op(J)) for J in combinations(range(self.m), self.eta)]

    def expected_gram(self):
        # each row lands in J with probability eta / m
        return np.diag(self.eta / self.m * self._scale**2)

    def lambda_max_bound(self, A):
        if self.n_atoms() <= 10_000:
            return super().lambda_max_bound(A)
        # lambda_max <= trace = sum of the eta largest weights (rows are normalised)
        return float(np.sort(self.weights)[-self.eta :].sum())


class IdentitySpace(SamplingSpace):
    """The deterministic space ``{I_m}``; turns every method into its full-matrix form."""

    def __init__(self, m: int):
        self.m = int(m)

    def draw(self, rng=None):
        return SampleOperator(self.m, description="identity")

    def atoms(self):
        return [(1.0, SampleOperator(self.m, description="identity"))]

    def expected_gram(self):
        return np.eye(self.m)

    def lambda_max_bound(self, A):
        return float(np.linalg.norm(A, 2) ** 2)


@dataclass
class GaussianSketch(SamplingSpace):
    """A single Gaussian column ``xi ~ N(0, cov)``; unbounded, so ``H = E[xi xi^T / ||xi||^2]``."""

    m: int
    cov: np.ndarray | None = None
    bounded: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.cov is None:
            self._chol = None
            return
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (self.m, self.m) or not np.allclose(cov, cov.T):
            raise ValueError("gaussian_sketch: covariance must be a symmetric m x m matrix")
        self._chol = np.linalg.cholesky(cov)  # raises if not positive definite

    def _sample(self, rng, size):
        g = rng.standard_normal((size, self.m))
        return g if self._chol is None else g @ self._chol.T

    def draw(self, rng):
        xi = self._sample(rng, 1)[0]
        return SampleOperator(self.m, dense=xi[:, None], description="gaussian")

    def gram_estimate(self, n_samples: int = 100_000, rng=None, batch: int = 10_000):
        """Monte Carlo mean of ``xi xi^T / ||xi||^2`` and its entrywise standard error."""
        rng = np.random.default_rng(rng)
        s1 = np.zeros((self.m, self.m))
        s2 = np.zeros((self.m, self.m))
        done = 0
        while done < n_samples:
            k = min(batch, n_samples - done)
            xi = self._sample(rng, k)
            u = xi / np.linalg.norm(xi, axis=1, keepdims=True)
            s1 += u.T @ u
            u2 = u**2
            s2 += u2.T @ u2  # (u_i u_j)^2 = u_i^2 u_j^2
            done += k
        mean = s1 / n_samples
        var = np.maximum(s2 / n_samples - mean**2, 0.0) * n_samples / max(n_samples - 1, 1)
        return mean, np.sqrt(var / n_samples)

    def expected_gram(self, n_samples: int = 100_000, rng=None):
        return self.gram_estimate(n_samples, rng)[0]

    def lambda_max_bound(self, A):
        # lambda_max(A^T xi xi^T A) / ||xi||^2 <= sigma_1(A)^2, attained at the top singular vector
        return float(np.linalg.norm(A, 2) ** 2)

    def check_assumption(self, rtol=1e-12):
        return True  # positive definite covariance, enforced by the Cholesky factorisation


def draw(space: SamplingSpace, rng: np.random.Generator) -> SampleOperator:
    return space.draw(rng)


def expected_gram(space: SamplingSpace, **kwargs) -> np.ndarray:
    return space.expected_gram(**kwargs)


def lambda_max_bound(space: SamplingSpace, A: np.ndarray) -> float:
    return space.lambda_max_bound(A)


def row_partition(m: int, tau: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random permutation of ``range(m)`` cut into ``ceil(m / tau)`` consecutive chunks."""
    if not 1 <= tau <= m:
        raise ValueError(f"block size must satisfy 1 <= tau <= m, got tau={tau}, m={m}")
    perm = rng.permutation(m)
    return [perm[i : i + tau] for i in range(0, m, tau)]


def block_probabilities(A: np.ndarray, partition: Sequence[Sequence[int]]) -> np.ndarray:
    """``p_j = ||A_{I_j}||_F^2 / ||A||_F^2``."""
    sq = np.sum(np.asarray(A, dtype=float) ** 2, axis=1)
    p = np.array([sq[np.asarray(blk, dtype=int)].sum() for blk in partition])
    return p / sq.sum()


def make_space(kind: str, A: np.ndarray, rng: np.random.Generator | None = None, **params) -> SamplingSpace:
    """Build a space by name from config-style parameters."""
    m = A.shape[0]
    if kind == "single_row":
        probs = params.get("probabilities", "row_norms")
        if isinstance(probs, str):
            if probs == "uniform":
                return SingleRow.uniform(m)
            if probs == "row_norms":
                return SingleRow.row_norms(A)
            raise ValueError(f"unknown probability rule {probs!r}")
        return SingleRow(probs)
    if kind == "block_partition":
        tau = int(params.get("tau", 1))
        return BlockPartition.from_matrix(A, min(tau, m), rng if rng is not None else np.random.default_rng())
    if kind == "weighted_block":
        return WeightedBlock.from_matrix(A, int(params.get("eta", 1)), params.get("weights"))
    if kind == "identity":
        return IdentitySpace(m)
    if kind == "gaussian_sketch":
        return GaussianSketch(m, params.get("cov"))
    raise ValueError(f"unknown sampling kind {kind!r}")
