"""UserKNN and NMF recommenders plus top-n list generation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import SparseMatrix
from .knn import KnnModel, knn_fit, knn_predict
from .nmf import NmfModel, nmf_fit, nmf_predict


@dataclass(frozen=True)
class RecommendationList:
    user: int
    items: Tuple[int, ...]
    scores: Tuple[float, ...]

    def __len__(self):
        return len(self.items)


def top_n(model, user: int, n: int, train: SparseMatrix, scores=None) -> RecommendationList:
    """Best ``n`` items outside the user's train profile.

    Ordered by predicted score (desc), then train popularity (desc), then
    item id (asc). ``scores`` may pass precomputed ``model.predict_user(user)``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if scores is None:
        scores = model.predict_user(user)
    seen, _ = train.row(user)
    cand = np.ones(train.shape[1], dtype=bool)
    cand[seen] = False
    cand = np.flatnonzero(cand)
    pop = train.col_counts()
    order = np.lexsort((cand, -pop[cand], -scores[cand]))[:n]
    picked = cand[order]
    return RecommendationList(int(user), tuple(picked.tolist()),
                              tuple(scores[picked].tolist()))


__all__ = ["KnnModel", "NmfModel", "RecommendationList", "knn_fit", "knn_predict",
           "nmf_fit", "nmf_predict", "top_n"]
