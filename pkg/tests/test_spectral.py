import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import min_inertia_2partition
from rolecluster.errors import InputError
from rolecluster.spectral import (
    LaplacianSpectrum,
    eigendecompose,
    estimate_num_speakers,
    kmeans,
    normalized_laplacian,
    spectral_embed,
)


def block_affinity(sizes, within=0.8):
    n = sum(sizes)
    w = np.zeros((n, n))
    start = 0
    for s in sizes:
        w[start:start + s, start:start + s] = within
        start += s
    np.fill_diagonal(w, 1.0)
    return w


def test_laplacian_identity_is_zero():
    np.testing.assert_array_equal(normalized_laplacian(np.eye(4)), np.zeros((4, 4)))


def test_laplacian_2x2_ones():
    lap = normalized_laplacian(np.ones((2, 2)))
    np.testing.assert_allclose(lap, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
    np.testing.assert_allclose(eigendecompose(lap).eigenvalues, [0, 1], atol=1e-12)


@pytest.mark.parametrize("sizes", [(3, 4), (2, 2, 5), (3, 3, 3, 3, 3)])
def test_block_diagonal_zero_multiplicity(sizes):
    vals = eigendecompose(normalized_laplacian(block_affinity(sizes))).eigenvalues
    assert np.sum(vals < 1e-9) == len(sizes)


def test_laplacian_rejects_zero_degree():
    with pytest.raises(InputError):
        normalized_laplacian(np.zeros((3, 3)))


def test_eigendecompose_simple_cases():
    assert np.all(eigendecompose(np.zeros((3, 3))).eigenvalues == 0)
    spec = eigendecompose(np.diag([0.1, 0.7]))
    np.testing.assert_allclose(spec.eigenvalues, [0.1, 0.7])
    np.testing.assert_allclose(np.abs(spec.eigenvectors), np.eye(2))
    with pytest.raises(InputError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(st.integers(0, 10_000))
def test_eigendecompose_reconstructs_and_signs(seed):
    a = np.random.default_rng(seed).standard_normal((8, 8))
    a = a + a.T
    spec = eigendecompose(a)
    recon = spec.eigenvectors @ np.diag(spec.eigenvalues) @ spec.eigenvectors.T
    assert np.linalg.norm(recon - a) < 1e-8
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    np.testing.assert_allclose(np.linalg.norm(spec.eigenvectors, axis=0), 1, atol=1e-8)
    for col in spec.eigenvectors.T:
        assert col[np.flatnonzero(np.abs(col) > 1e-12)[0]] > 0


def test_estimate_ratio_example():
    vals = np.array([0, 0.01, 0.02, 0.8, 1.0])
    # ratios at k=2,3,4: 2, 40, 1.25
    assert estimate_num_speakers(vals, (2, 4)) == 3
    assert estimate_num_speakers(vals, [2]) == 2


@pytest.mark.parametrize("b", [2, 3, 5, 8])
def test_estimate_block_count(b):
    spec = eigendecompose(normalized_laplacian(block_affinity([4] * b)))
    assert estimate_num_speakers(spec, (2, 50)) == b


def test_estimate_clamps_and_rejects_empty():
    vals = np.array([0.0, 0.0, 0.5])
    assert estimate_num_speakers(vals, (2, 50)) == 2
    with pytest.raises(InputError):
        estimate_num_speakers(np.array([0.0, 1.0]), (2, 50))


def test_embed_full_basis_rows_already_unit(rng):
    a = rng.standard_normal((6, 6))
    spec = eigendecompose(a + a.T)
    emb = spectral_embed(spec, 6)
    np.testing.assert_allclose(emb.rows, spec.eigenvectors, atol=1e-12)
    assert not emb.degenerate


@pytest.mark.parametrize("sizes", [(4, 5), (3, 4, 5)])
def test_embed_block_rows_collapse(sizes):
    spec = eigendecompose(normalized_laplacian(block_affinity(sizes)))
    rows = spectral_embed(spec, len(sizes)).rows
    bounds = np.cumsum((0,) + sizes)
    reps = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        np.testing.assert_allclose(rows[lo:hi], np.repeat(rows[lo:lo + 1], hi - lo, axis=0), atol=1e-8)
        reps.append(rows[lo])
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            assert np.linalg.norm(reps[i] - reps[j]) > 0.5


def test_embed_k1_is_signs(rng):
    a = rng.standard_normal((5, 5))
    rows = spectral_embed(eigendecompose(a + a.T), 1).rows
    np.testing.assert_allclose(np.abs(rows), 1.0)


def test_embed_zero_rows_flagged():
    spec = LaplacianSpectrum(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    emb = spectral_embed(spec, 1)
    assert emb.zero_rows.tolist() == [True, False]
    with pytest.raises(InputError):
        spectral_embed(spec, 3)


def test_kmeans_identical_points():
    res = kmeans(np.ones((5, 3)), 1, seed=0)
    assert res.inertia == 0 and np.all(res.labels == 0)


def test_kmeans_two_coincident_pairs():
    x = np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 10.0], [10.0, 10.0]])
    res = kmeans(x, 2, seed=3)
    assert res.labels[0] == res.labels[1] != res.labels[2] == res.labels[3]
    assert res.inertia == pytest.approx(min_inertia_2partition(x), abs=1e-12)


@given(st.integers(3, 8), st.integers(1, 3), st.integers(0, 100_000))
def test_kmeans_matches_exhaustive(n, d, seed):
    x = np.random.default_rng(seed).standard_normal((n, d))
    assert kmeans(x, 2, seed=seed).inertia == pytest.approx(min_inertia_2partition(x), abs=1e-9)


def test_kmeans_deterministic(rng):
    x = rng.standard_normal((40, 3))
    a, b = kmeans(x, 4, seed=11), kmeans(x, 4, seed=11)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.inertia == b.inertia


def test_kmeans_too_many_clusters():
    with pytest.raises(InputError):
        kmeans(np.zeros((2, 2)), 3)
