import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsdcd.linalg import (
    ProblemInstance,
    gen_bernoulli,
    gen_gaussian,
    gen_sparse_signal,
    gen_subsampled_hadamard,
    make_problem,
    matvec,
    next_power_of_two,
    rmatvec,
    row_block,
    spectral_norms,
    stream,
)


def test_gaussian_deterministic():
    np.testing.assert_array_equal(gen_gaussian(2, 2, 5), gen_gaussian(2, 2, 5))
    assert not np.array_equal(gen_gaussian(2, 2, 5), gen_gaussian(2, 2, 6))


def test_gaussian_moments():
    A = gen_gaussian(500, 200, 3)
    assert abs(A.mean()) < 0.02
    assert abs(A.var() - 1.0) < 0.05


def test_gaussian_1x1():
    A = gen_gaussian(1, 1, 0)
    assert A.shape == (1, 1) and np.isfinite(A).all()


def test_bernoulli_support_and_balance():
    A = gen_bernoulli(500, 200, 4)
    assert set(np.unique(A)) <= {-1.0, 1.0}
    assert abs((A > 0).mean() - 0.5) < 0.02
    np.testing.assert_array_equal(A, gen_bernoulli(500, 200, 4))


def test_hadamard_square_is_orthonormal():
    H = gen_subsampled_hadamard(4, 4, 0)
    np.testing.assert_allclose(H @ H.T, np.eye(4), atol=1e-12)


def test_hadamard_rows_unit_norm_and_entries():
    H = gen_subsampled_hadamard(2, 4, 1)
    np.testing.assert_allclose(np.linalg.norm(H, axis=1), 1.0, atol=1e-12)
    H = gen_subsampled_hadamard(16, 64, 2)
    np.testing.assert_allclose(np.abs(H), 1 / 8)
    # rows are drawn without replacement
    assert len({tuple(r) for r in H}) == 16


@pytest.mark.parametrize("m,n", [(2, 6), (5, 4)])
def test_hadamard_rejects_bad_shapes(m, n):
    with pytest.raises(ValueError):
        gen_subsampled_hadamard(m, n, 0)


def test_next_power_of_two():
    assert [next_power_of_two(k) for k in (1, 2, 3, 500, 512)] == [1, 2, 4, 512, 512]


def test_sparse_signal():
    assert np.count_nonzero(gen_sparse_signal(10, 10, 1)) == 10
    x = gen_sparse_signal(500, 20, 2)
    assert np.count_nonzero(x) == 20
    np.testing.assert_array_equal(x, gen_sparse_signal(500, 20, 2))
    with pytest.raises(ValueError):
        gen_sparse_signal(5, 6, 0)


def test_matvec_helpers(rng):
    x = rng.standard_normal(3)
    np.testing.assert_array_equal(matvec(np.eye(3), x), x)
    A = rng.standard_normal((4, 3))
    np.testing.assert_array_equal(rmatvec(A, np.eye(4)[2]), A[2])
    np.testing.assert_array_equal(row_block(A, range(4)), A)
    with pytest.raises(ValueError):
        matvec(A, np.ones(4))


def test_spectral_norms_hand_cases():
    assert spectral_norms(np.diag([3.0, 1.0])) == pytest.approx((3.0, 1.0))
    assert spectral_norms(np.array([[1.0, 0.0], [0.0, 0.0]])) == pytest.approx((1.0, 1.0))
    with pytest.raises(ValueError):
        spectral_norms(np.zeros((2, 2)))


def test_spectral_norms_against_gram_eigenvalues(rng):
    A = rng.standard_normal((20, 10))
    ev = np.linalg.eigvalsh(A.T @ A)
    smax, smin = spectral_norms(A)
    assert smax == pytest.approx(np.sqrt(ev[-1]), abs=1e-8)
    assert smin == pytest.approx(np.sqrt(ev[0]), abs=1e-8)


def test_stream_independent_keys():
    a = stream(1, 0, 0).standard_normal(4)
    np.testing.assert_array_equal(a, stream(1, 0, 0).standard_normal(4))
    assert not np.array_equal(a, stream(1, 0, 1).standard_normal(4))


def test_problem_instance_validation():
    A = np.eye(2)
    with pytest.raises(ValueError):
        ProblemInstance(A=A, b=np.array([1.0, 0.0]), solution=np.array([0.0, 1.0]), family="custom", seed=0)
    with pytest.raises(ValueError):
        ProblemInstance(A=A, b=np.ones(3), solution=None, family="custom", seed=0)
    p = ProblemInstance(A=A, b=np.ones(2), solution=np.ones(2), family="custom", seed=0)
    with pytest.raises(ValueError):
        p.A[0, 0] = 5.0


@pytest.mark.parametrize("family", ["gaussian", "bernoulli", "subsampled_hadamard"])
def test_make_problem_consistent(family):
    p = make_problem(family, 30, 50, 5, seed=9)
    assert np.linalg.norm(p.A @ p.solution - p.b) <= 1e-10 * (1 + np.linalg.norm(p.b))
    assert np.count_nonzero(p.solution) == 5


def test_make_problem_hadamard_rounds_n():
    p = make_problem("subsampled_hadamard", 30, 50, 5, seed=9)
    assert p.shape == (30, 64)
    assert p.meta["n_requested"] == 50


@settings(max_examples=25, deadline=None)
@given(m=st.integers(1, 12), n=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_make_problem_shapes(m, n, seed):
    s = min(n, 3)
    p = make_problem("gaussian", m, n, s, seed)
    assert p.A.shape == (m, n) and p.b.shape == (m,)
