"""Dataset-shape checks against the published dataset statistics table."""
import math

import numpy as np
import pytest

from popaudit.core import IdMap, InteractionDataset, build_matrix
from popaudit.ingest import compute_statistics, load_dataset


def shaped(n_users, n_items, n_ratings, seed=0):
    """Distinct (user, item) pairs touching every user and item."""
    rng = np.random.default_rng(seed)
    base = np.concatenate([np.arange(n_items) % n_users * n_items + np.arange(n_items),
                           np.arange(n_users) * n_items + np.arange(n_users) % n_items])
    keys = np.unique(base)
    while keys.size < n_ratings:
        extra = rng.integers(0, n_users * n_items, size=n_ratings - keys.size + 1000)
        keys = np.unique(np.concatenate([keys, extra]))
    pinned = np.isin(keys, base)
    rest = rng.permutation(keys[~pinned])[: n_ratings - pinned.sum()]
    keys = np.sort(np.concatenate([keys[pinned], rest]))
    return keys // n_items, keys % n_items


def dataset(n_users, n_items, n_ratings, rating_range=(1, 5)):
    u, i = shaped(n_users, n_items, n_ratings)
    return InteractionDataset(n_users, n_items, u, i, np.full(u.size, float(rating_range[0])),
                              ((),) * n_items, rating_range[0], rating_range[1],
                              IdMap.dense(n_users, "u"), IdMap.dense(n_items, "i"), IdMap(()))


def test_lastfm_shape_entry_count():
    ds = dataset(3000, 131188, 1417791, (1, 1000))
    m = build_matrix(ds)
    assert m.nnz == 1417791
    assert m.shape == (3000, 131188)
    s = compute_statistics(ds)
    assert round(s.ratings_per_user) == 473 and round(s.ratings_per_item) == 11
    assert s.sparsity == pytest.approx(0.996, abs=0.001)


def test_movielens_shape_from_files(tmp_path):
    u, i = shaped(3000, 3667, 675610, seed=1)
    genres = [f"g{j}" for j in range(18)]
    with open(tmp_path / "r.tsv", "w") as fh:
        fh.writelines(f"u{a}\tm{b}\t{1 + (a + b) % 5}\n" for a, b in zip(u.tolist(), i.tolist()))
    with open(tmp_path / "g.tsv", "w") as fh:
        fh.writelines(f"m{b}\t{genres[b % 18]}\n" for b in range(3667))
    s = compute_statistics(load_dataset(tmp_path / "r.tsv", tmp_path / "g.tsv", (1, 5)))
    assert (s.n_users, s.n_items, s.n_ratings, s.n_genres) == (3000, 3667, 675610, 18)
    assert s.sparsity == pytest.approx(0.938, abs=0.001)
    assert round(s.ratings_per_user) == 225 and round(s.ratings_per_item) == 184


def test_myanimelist_shape_statistics():
    s = compute_statistics(dataset(3000, 9450, 649814, (1, 10)))
    assert s.sparsity == pytest.approx(0.977, abs=0.001)
    # the published table shows 216 for 216.60 (truncated, unlike its other cells)
    assert s.ratings_per_user == pytest.approx(216.6047, abs=1e-4)
    assert math.floor(s.ratings_per_user) == 216
    assert round(s.ratings_per_item) == 69
