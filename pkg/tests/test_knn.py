import numpy as np
import pytest

from popaudit import _backend

from popaudit.core import DatasetError, SparseMatrix
from popaudit.recommenders import knn_fit, knn_predict

from conftest import oracle_predict, oracle_profiles, oracle_similarity, random_matrix


def test_identical_profiles_similarity_one(backend):
    m = SparseMatrix.from_dense([[5, 3, 1], [5, 3, 1], [0, 0, 2]])
    model = knn_fit(m, k=2, backend=backend)
    assert model.similarity(0, 1) == 1.0


def test_toy_similarities(backend):
    # u0 and u1 agree on their co-rated items; u2 shares nothing with them
    m = SparseMatrix.from_dense([[5, 3, 0], [5, 3, 0], [0, 0, 4]])
    model = knn_fit(m, k=2, backend=backend)
    assert model.similarity(0, 1) == 1.0
    assert model.similarity(0, 2) == 0.0
    assert model.similarity(1, 2) == 0.0


def test_similarity_symmetric_and_bounded(backend):
    m = random_matrix(np.random.default_rng(3), 25, 20)
    model = knn_fit(m, k=5, backend=backend)
    assert np.array_equal(model.sim, model.sim.T)
    assert model.sim.min() >= -1.0 and model.sim.max() <= 1.0
    assert np.all(np.diag(model.sim) == 0.0)


def test_fallback_to_user_mean(backend):
    # nobody else rated item 2
    m = SparseMatrix.from_dense([[4, 2, 0], [5, 3, 0], [0, 0, 1]], rating_range=(1, 5))
    model = knn_fit(m, k=3, backend=backend)
    assert knn_predict(model, 1, 2) == 4.0


def test_single_neighbor_identity(backend):
    # neighbour 0 has mean 3 and rates item 2 at 4 (= its mean + 1)
    dense = np.array([[3, 2, 4, 3], [3, 0, 0, 0]], dtype=float)
    m = SparseMatrix.from_dense(dense, rating_range=(1, 5))
    model = knn_fit(m, k=5, backend=backend)
    assert model.similarity(1, 0) == 1.0
    assert knn_predict(model, 1, 2) == pytest.approx(3.0 + 1.0, abs=0)


def test_prediction_is_clipped(backend):
    dense = np.array([[1, 1, 5], [5, 5, 0]], dtype=float)
    m = SparseMatrix.from_dense(dense, rating_range=(1, 5))
    model = knn_fit(m, k=5, backend=backend)
    # mean 5 plus positive deviation would exceed the range
    assert knn_predict(model, 1, 2) == 5.0


@pytest.mark.parametrize("seed", range(10))
def test_matches_brute_force_oracle(backend, seed):
    rng = np.random.default_rng(seed)
    m = random_matrix(rng, 20, 15)
    k = int(rng.integers(1, 8))
    model = knn_fit(m, k=k, backend=backend)
    prof = oracle_profiles(m)
    for u in range(20):
        for v in range(20):
            if u != v:
                assert model.similarity(u, v) == oracle_similarity(prof[u], prof[v])
        row = model.predict_user(u)
        for i in range(15):
            expected = oracle_predict(m, k, u, i)
            assert knn_predict(model, u, i) == expected
            assert row[i] == expected


def test_backends_identical():
    if _backend.compiled is None:
        pytest.skip("compiled kernels not active")
    rng = np.random.default_rng(11)
    m = random_matrix(rng, 60, 80, density=0.2)
    a = knn_fit(m, k=7, backend="python")
    b = knn_fit(m, k=7, backend="cython")
    assert np.array_equal(a.sim, b.sim)
    for u in range(60):
        assert np.array_equal(a.predict_user(u), b.predict_user(u))


def test_permutation_invariance():
    rng = np.random.default_rng(5)
    m = random_matrix(rng, 15, 12)
    rows, cols, vals = m.row_of, m.indices, m.data
    perm = rng.permutation(rows.size)
    m2 = SparseMatrix(15, 12, rows[perm], cols[perm], vals[perm], m.rating_range)
    a, b = knn_fit(m, 4), knn_fit(m2, 4)
    for u in range(15):
        assert np.array_equal(a.predict_user(u), b.predict_user(u))


def test_errors():
    m = SparseMatrix.from_dense([[1, 2], [3, 0]])
    with pytest.raises(ValueError):
        knn_fit(m, k=0)
    with pytest.raises(DatasetError):
        knn_fit(SparseMatrix(2, 2, [], [], []), k=3)
    model = knn_fit(m, k=1)
    with pytest.raises(IndexError):
        knn_predict(model, 5, 0)
    with pytest.raises(IndexError):
        knn_predict(model, 0, 9)
