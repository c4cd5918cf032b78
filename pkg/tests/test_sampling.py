import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsdcd.sampling import (
    BlockPartition,
    GaussianSketch,
    IdentitySpace,
    SampleOperator,
    SingleRow,
    WeightedBlock,
    block_probabilities,
    draw,
    expected_gram,
    lambda_max_bound,
    make_space,
    row_partition,
)


def dense(S: SampleOperator) -> np.ndarray:
    return np.column_stack([S.apply_S(e) for e in np.eye(S.q)])


def test_identity_draw(rng):
    S = draw(IdentitySpace(3), rng)
    v = rng.standard_normal(3)
    np.testing.assert_array_equal(S.apply_St(v), v)


def test_point_mass_single_row(rng):
    space = SingleRow([1.0, 0.0, 0.0])
    for _ in range(20):
        S = draw(space, rng)
        assert S.apply_St(np.array([4.0, 5.0, 6.0])).tolist() == [4.0]


def test_single_row_frequencies(rng):
    p = np.array([0.1, 0.6, 0.3])
    space = SingleRow(p)
    counts = np.bincount([space.draw(rng).rows[0] for _ in range(20000)], minlength=3)
    np.testing.assert_allclose(counts / 20000, p, atol=0.015)


def test_simplex_validation():
    with pytest.raises(ValueError):
        SingleRow([0.5, 0.6])
    with pytest.raises(ValueError):
        SingleRow([1.5, -0.5])
    with pytest.raises(ValueError):
        BlockPartition([[0, 1], [1, 2]], [0.5, 0.5])
    with pytest.raises(ValueError):
        BlockPartition([[0], [2]], [0.5, 0.5], m=3)


def test_weighted_block_single_row_is_kaczmarz_direction(rng):
    A = rng.standard_normal((5, 3))
    x, b = rng.standard_normal(3), rng.standard_normal(5)
    S = WeightedBlock.from_matrix(A, 1).draw(rng)
    i = S.rows[0]
    SA, Sb = S.sketch(A, b)
    direction = SA.T @ (SA @ x - Sb)
    expected = (A[i] @ x - b[i]) / (A[i] @ A[i]) * A[i]
    np.testing.assert_allclose(direction, expected, rtol=1e-12)


# --- second moments against hand sums -------------------------------------------


def test_expected_gram_hand_values():
    p = np.array([0.2, 0.5, 0.3])
    np.testing.assert_array_equal(expected_gram(SingleRow(p)), np.diag(p))
    np.testing.assert_array_equal(expected_gram(IdentitySpace(4)), np.eye(4))
    np.testing.assert_array_equal(expected_gram(BlockPartition([[0], [1]], [0.5, 0.5])), 0.5 * np.eye(2))


def test_expected_gram_enumeration_matches_dense_atoms(rng):
    A = rng.standard_normal((6, 3))
    spaces = [
        SingleRow.row_norms(A),
        BlockPartition.from_matrix(A, 4, rng),
        WeightedBlock.from_matrix(A, 2, rng.uniform(0.2, 1.0, 6)),
        IdentitySpace(6),
    ]
    for space in spaces:
        oracle = sum(p * dense(S) @ dense(S).T for p, S in space.atoms())
        np.testing.assert_allclose(space.expected_gram(), oracle, atol=1e-15)
        assert space.check_assumption()


def test_lambda_max_hand_values(rng):
    A = rng.standard_normal((6, 4))
    norms = np.sum(A**2, axis=1)
    assert lambda_max_bound(SingleRow.uniform(6), A) == pytest.approx(norms.max())
    assert lambda_max_bound(IdentitySpace(6), A) == pytest.approx(np.linalg.norm(A, 2) ** 2)
    space = BlockPartition([[0, 3], [1, 2, 5], [4]], [0.3, 0.3, 0.4])
    oracle = max(np.linalg.eigvalsh(A[blk].T @ A[blk])[-1] for blk in space.blocks)
    assert lambda_max_bound(space, A) == pytest.approx(oracle, rel=1e-12)


def test_weighted_block_large_bound_is_trace_bound(rng):
    A = rng.standard_normal((40, 10))
    w = rng.uniform(0.1, 1.0, 40)
    space = WeightedBlock.from_matrix(A, 6, w)
    assert space.n_atoms() > 10_000
    bound = space.lambda_max_bound(A)
    assert bound == pytest.approx(np.sort(w)[-6:].sum())
    for _ in range(50):
        SA, _ = space.draw(rng).sketch(A, np.zeros(40))
        assert np.linalg.norm(SA, 2) ** 2 <= bound + 1e-12


def test_row_partition_sizes(rng):
    blocks = row_partition(4, 4, rng)
    assert len(blocks) == 1 and sorted(blocks[0]) == [0, 1, 2, 3]
    assert [len(b) for b in row_partition(5, 2, rng)] == [2, 2, 1]
    with pytest.raises(ValueError):
        row_partition(3, 0, rng)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(1, 60), data=st.data())
def test_row_partition_is_partition(m, data):
    tau = data.draw(st.integers(1, m))
    blocks = row_partition(m, tau, np.random.default_rng(data.draw(st.integers(0, 2**31))))
    flat = np.concatenate(blocks)
    assert sorted(flat.tolist()) == list(range(m))
    assert all(len(b) <= tau for b in blocks)


def test_block_probabilities_hand_values():
    assert block_probabilities(np.ones((3, 2)), [[0, 1, 2]]).tolist() == [1.0]
    np.testing.assert_allclose(block_probabilities(np.ones((4, 2)), [[0, 1], [2, 3]]), [0.5, 0.5])
    A = np.array([[1.0, 0.0], [0.0, 2.0], [2.0, 0.0]])
    np.testing.assert_allclose(block_probabilities(A, [[0], [1, 2]]), [1 / 9, 8 / 9], rtol=1e-15)


@pytest.mark.parametrize(
    "space_fn",
    [
        lambda A, r: SingleRow.row_norms(A),
        lambda A, r: BlockPartition.from_matrix(A, 3, r),
        lambda A, r: WeightedBlock.from_matrix(A, 3),
        lambda A, r: IdentitySpace(A.shape[0]),
        lambda A, r: GaussianSketch(A.shape[0]),
    ],
)
def test_operator_adjointness_and_zero_residual_equivalence(space_fn, rng):
    A = rng.standard_normal((10, 15))  # full row rank, so any b is consistent
    b = A @ rng.standard_normal(15)
    space = space_fn(A, rng)
    for _ in range(20):
        S = space.draw(rng)
        u, v = rng.standard_normal(10), rng.standard_normal(S.q)
        assert S.apply_St(u) @ v == pytest.approx(u @ S.apply_S(v), rel=1e-12, abs=1e-12)
        x = rng.standard_normal(15) if rng.random() < 0.7 else np.linalg.lstsq(A, b, rcond=None)[0]
        SA, Sb = S.sketch(A, b)
        s = SA @ x - Sb
        zero_s = np.linalg.norm(s) <= 1e-14 * (1 + np.linalg.norm(b))
        zero_d = np.linalg.norm(SA.T @ s) <= 1e-12 * (1 + np.linalg.norm(b))
        assert zero_s == zero_d


def test_sketch_matches_dense(rng):
    A, b = rng.standard_normal((6, 4)), rng.standard_normal(6)
    S = WeightedBlock.from_matrix(A, 3).draw(rng)
    D = dense(S)
    SA, Sb = S.sketch(A, b)
    np.testing.assert_allclose(SA, D.T @ A)
    np.testing.assert_allclose(Sb, D.T @ b)
    assert S.frobenius_sq == pytest.approx(np.sum(D**2))


def _random_cov(rng, n):
    U, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return U @ np.diag(rng.uniform(0.2, 5.0, n)) @ U.T


def test_gaussian_sketch_positive_definite(rng):
    g = GaussianSketch(5, _random_cov(rng, 5))
    ev = np.linalg.eigvalsh(g.expected_gram(10_000, rng))
    assert ev[0] > 1e-4 * ev[-1]


def test_gaussian_sketch_sphere_bound(rng):
    cov = _random_cov(rng, 5)
    mean, se = GaussianSketch(5, cov).gram_estimate(200_000, rng)
    gap = mean - (2 / np.pi) * cov / np.trace(cov)
    assert np.linalg.eigvalsh(gap)[0] >= -3 * np.linalg.norm(se, 2)


def test_gaussian_sketch_rejects_bad_covariance():
    with pytest.raises(ValueError):
        GaussianSketch(2, np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(np.linalg.LinAlgError):
        GaussianSketch(2, np.array([[1.0, 0.0], [0.0, -1.0]]))


def test_make_space_dispatch(rng):
    A = rng.standard_normal((8, 3))
    assert isinstance(make_space("single_row", A, probabilities="uniform"), SingleRow)
    assert isinstance(make_space("block_partition", A, rng, tau=3), BlockPartition)
    assert isinstance(make_space("weighted_block", A, eta=2), WeightedBlock)
    assert isinstance(make_space("identity", A), IdentitySpace)
    with pytest.raises(ValueError):
        make_space("bogus", A)
