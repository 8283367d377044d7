"""User-based k-nearest-neighbour collaborative filtering."""
from __future__ import annotations

import numpy as np

from .. import _backend
from ..core import DatasetError, SparseMatrix


class KnnModel:
    """UserKNN over a train matrix.

    Similarity is cosine over raw ratings restricted to co-rated items (0 for
    pairs without overlap). A prediction for (u, i) takes the ``k`` most
    similar users with positive similarity who rated ``i`` (ties: lower user
    id first) and adds their similarity-weighted, mean-centred ratings to
    u's mean.
    """

    def __init__(self, train: SparseMatrix, k: int = 40, backend: str = None):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if train.nnz == 0:
            raise DatasetError("cannot fit on an empty matrix")
        self.k = int(k)
        self.train = train
        self.kernels = _backend.get(backend)
        n_users, self.n_items = train.shape
        counts = train.row_counts()
        sums = np.bincount(train.row_of, weights=train.data, minlength=n_users)
        self.means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        self.sim = self.kernels.corated_cosine(
            train.indptr, train.indices, train.data, train.col_indptr,
            train.col_indices, train.col_data, n_users)
        self._order = {}

    @property
    def n_users(self) -> int:
        return self.train.shape[0]

    @property
    def rating_range(self):
        return self.train.rating_range

    def similarity(self, u: int, v: int) -> float:
        return float(self.sim[u, v])

    def neighbors(self, u: int):
        """Users with positive similarity to ``u``, best first, and their weights."""
        cached = self._order.get(u)
        if cached is None:
            row = self.sim[u]
            cand = np.flatnonzero(row > 0)
            cand = cand[cand != u]
            cand = cand[np.lexsort((cand, -row[cand]))]
            cached = (cand, np.ascontiguousarray(row[cand]))
            self._order[u] = cached
        return cached

    def _check(self, user, item=None):
        if not 0 <= user < self.n_users:
            raise IndexError(f"unknown user id {user}")
        if item is not None and not 0 <= item < self.n_items:
            raise IndexError(f"unknown item id {item}")

    def _finish(self, u, num, den):
        lo, hi = self.rating_range
        with np.errstate(invalid="ignore", divide="ignore"):
            pred = np.where(den > 0, self.means[u] + num / np.where(den > 0, den, 1.0),
                            self.means[u])
        return np.clip(pred, lo, hi)

    def predict_user(self, user: int) -> np.ndarray:
        """Clipped predictions for every item."""
        self._check(user)
        nb, w = self.neighbors(user)
        t = self.train
        num, den, _ = self.kernels.knn_accumulate(
            nb, w, t.indptr, t.indices, t.data, self.means, self.k, self.n_items)
        return self._finish(user, num, den)

    def predict(self, user: int, item: int) -> float:
        self._check(user, item)
        raters, vals = self.train.col(item)
        s = self.sim[user, raters]
        keep = (s > 0) & (raters != user)
        raters, vals, s = raters[keep], vals[keep], s[keep]
        order = np.lexsort((raters, -s))[: self.k]
        num = den = 0.0
        for j in order.tolist():
            num += s[j] * (vals[j] - self.means[raters[j]])
            den += s[j]
        return float(self._finish(user, np.array([num]), np.array([den]))[0])


def knn_fit(train: SparseMatrix, k: int = 40, backend: str = None) -> KnnModel:
    return KnnModel(train, k, backend)


def knn_predict(model: KnnModel, user: int, item: int) -> float:
    return model.predict(user, item)
