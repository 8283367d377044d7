"""Non-negative matrix factorization fitted on observed entries only."""
from __future__ import annotations

import numpy as np

from .. import _backend
from ..core import DatasetError, SparseMatrix

EPS = 1e-12


class NmfModel:
    """Factors ``W`` (users x f) and ``H`` (f x items), both non-negative.

    Fitting minimizes the squared error over observed ratings with
    multiplicative updates in which unobserved cells carry zero weight::

        W <- W * (R H^T) / (P H^T + eps)
        H <- H * (W^T R) / (W^T P + eps)

    where ``R`` and ``P`` hold observed ratings and current predictions at
    observed cells and are zero elsewhere.
    """

    def __init__(self, W, H, rating_range, loss_history):
        self.W = W
        self.H = H
        self.rating_range = rating_range
        self.loss_history = loss_history

    @property
    def factors(self) -> int:
        return self.W.shape[1]

    @property
    def n_users(self) -> int:
        return self.W.shape[0]

    @property
    def n_items(self) -> int:
        return self.H.shape[1]

    def _check(self, user, item=None):
        if not 0 <= user < self.n_users:
            raise IndexError(f"unknown user id {user}")
        if item is not None and not 0 <= item < self.n_items:
            raise IndexError(f"unknown item id {item}")

    def predict(self, user: int, item: int) -> float:
        self._check(user, item)
        lo, hi = self.rating_range
        return float(np.clip(self.W[user] @ self.H[:, item], lo, hi))

    def predict_user(self, user: int) -> np.ndarray:
        self._check(user)
        lo, hi = self.rating_range
        return np.clip(self.W[user] @ self.H, lo, hi)


def nmf_fit(train: SparseMatrix, factors: int = 15, iterations: int = 200,
            seed: int = 42, backend: str = None) -> NmfModel:
    if factors < 1:
        raise ValueError(f"factors must be >= 1, got {factors}")
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if train.nnz == 0:
        raise DatasetError("cannot fit on an empty matrix")
    kern = _backend.get(backend)
    n_users, n_items = train.shape
    rng = np.random.default_rng(seed)
    # uniform on (0, 1]
    W = 1.0 - rng.random((n_users, factors))
    Ht = 1.0 - rng.random((n_items, factors))

    rows, cols = train.row_of, train.indices
    r = train.data
    # CSR position -> CSC position for reusing predictions column-wise
    to_csc = np.lexsort((rows, cols))
    r_csc = train.col_data

    pred = kern.sampled_dot(rows, cols, W, Ht)
    history = []
    for _ in range(iterations):
        W *= kern.sparse_dense(train.indptr, cols, r, Ht) / (
            kern.sparse_dense(train.indptr, cols, pred, Ht) + EPS)
        pred = kern.sampled_dot(rows, cols, W, Ht)
        num_h = kern.sparse_dense(train.col_indptr, train.col_indices, r_csc, W)
        den_h = kern.sparse_dense(train.col_indptr, train.col_indices,
                                  np.ascontiguousarray(pred[to_csc]), W)
        Ht *= num_h / (den_h + EPS)
        pred = kern.sampled_dot(rows, cols, W, Ht)
        history.append(float(np.sum((r - pred) ** 2)))
    return NmfModel(W, np.ascontiguousarray(Ht.T), train.rating_range, history)


def nmf_predict(model: NmfModel, user: int, item: int) -> float:
    return model.predict(user, item)
