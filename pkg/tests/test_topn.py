import numpy as np
import pytest

from popaudit.core import SparseMatrix
from popaudit.recommenders import knn_fit, nmf_fit, top_n

from conftest import random_matrix


class FixedScores:
    def __init__(self, scores):
        self.scores = np.asarray(scores, dtype=float)

    def predict_user(self, user):
        return self.scores


def test_profile_items_excluded():
    train = SparseMatrix.from_dense([[5, 3, 0], [1, 0, 0]])
    rl = top_n(FixedScores([9, 9, 1]), 0, 10, train)
    assert rl.items == (2,) and len(rl) == 1


def test_full_profile_gives_empty_list():
    train = SparseMatrix.from_dense([[5, 3], [1, 2]])
    assert top_n(FixedScores([1, 2]), 0, 5, train).items == ()


def test_tie_broken_by_popularity_then_id():
    # item 1 rated by 3 other users, item 2 by one, item 3 by one
    dense = np.array([[5, 0, 0, 0], [0, 1, 1, 0], [0, 1, 0, 1], [0, 1, 0, 0]], float)
    train = SparseMatrix.from_dense(dense)
    rl = top_n(FixedScores([0, 4, 4, 4]), 0, 3, train)
    assert rl.items == (1, 2, 3)
    rl = top_n(FixedScores([0, 3, 4, 4]), 0, 2, train)
    assert rl.items == (2, 3)


def test_invariants_on_real_models():
    m = random_matrix(np.random.default_rng(0), 30, 40, density=0.15)
    for model in (knn_fit(m, 10), nmf_fit(m, 4, 30, seed=1)):
        for u in range(30):
            rl = top_n(model, u, 10, m)
            profile = set(m.row(u)[0].tolist())
            assert len(rl) == min(10, 40 - len(profile))
            assert not profile & set(rl.items)
            assert len(set(rl.items)) == len(rl.items)
            assert all(a >= b for a, b in zip(rl.scores, rl.scores[1:]))
            lo, hi = m.rating_range
            assert all(lo <= s <= hi for s in rl.scores)


def test_bad_n():
    train = SparseMatrix.from_dense([[1, 0]])
    with pytest.raises(ValueError):
        top_n(FixedScores([1, 1]), 0, 0, train)
