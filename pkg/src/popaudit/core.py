"""Domain types shared by every stage of the audit.

Ids are dense 0-based integers assigned at ingestion in first-appearance
order of the external string keys. All containers are immutable after
construction; numpy arrays are flagged read-only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

import numpy as np


class DatasetError(ValueError):
    """Raised for malformed or inconsistent interaction data."""


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True).reshape(-1)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class IdMap:
    """Bijection between external string keys and dense integer ids."""

    keys: Tuple[str, ...]
    index: Mapping[str, int] = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {k: i for i, k in enumerate(self.keys)})
        if len(self.index) != len(self.keys):
            raise DatasetError("id map keys are not unique")

    @classmethod
    def dense(cls, n: int, prefix: str = "") -> "IdMap":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    def __len__(self) -> int:
        return len(self.keys)

    def to_internal(self, key: str) -> int:
        return self.index[key]

    def to_external(self, idx: int) -> str:
        return self.keys[idx]


@dataclass(frozen=True, eq=False)
class InteractionDataset:
    """Users, items, observed ratings and genre assignments.

    Ratings are held column-wise in ``user``, ``item`` and ``value`` arrays.
    ``genres_of[i]`` is the (possibly empty) frozenset of genre ids of item
    ``i``.
    """

    n_users: int
    n_items: int
    user: np.ndarray
    item: np.ndarray
    value: np.ndarray
    genres_of: Tuple[frozenset, ...]
    range_min: float
    range_max: float
    user_ids: IdMap
    item_ids: IdMap
    genre_ids: IdMap
    ignored_genre_items: int = 0

    def __post_init__(self):
        object.__setattr__(self, "user", _frozen(self.user, np.int64))
        object.__setattr__(self, "item", _frozen(self.item, np.int64))
        object.__setattr__(self, "value", _frozen(self.value, np.float64))
        object.__setattr__(self, "genres_of", tuple(frozenset(g) for g in self.genres_of))
        self._validate()

    def _validate(self):
        if not (self.user.shape == self.item.shape == self.value.shape):
            raise DatasetError("rating columns differ in length")
        if self.range_min >= self.range_max:
            raise DatasetError(
                f"invalid rating range [{self.range_min}, {self.range_max}]")
        if len(self.user_ids) != self.n_users or len(self.item_ids) != self.n_items:
            raise DatasetError("id maps do not match entity counts")
        if len(self.genres_of) != self.n_items:
            raise DatasetError("genres_of must have one entry per item")
        if self.user.size:
            if self.user.min() < 0 or self.user.max() >= self.n_users:
                raise DatasetError("rating references an unknown user")
            if self.item.min() < 0 or self.item.max() >= self.n_items:
                raise DatasetError("rating references an unknown item")
            bad = (self.value < self.range_min) | (self.value > self.range_max)
            if bad.any():
                v = self.value[np.argmax(bad)]
                raise DatasetError(
                    f"rating {v!r} outside range [{self.range_min}, {self.range_max}]")
            key = self.user * self.n_items + self.item
            if np.unique(key).size != key.size:
                raise DatasetError("duplicate rating")
        n_genres = len(self.genre_ids)
        for g in self.genres_of:
            for c in g:
                if not 0 <= c < n_genres:
                    raise DatasetError(f"unknown genre id {c}")

    @property
    def n_ratings(self) -> int:
        return int(self.value.size)

    @property
    def n_genres(self) -> int:
        return len({c for g in self.genres_of for c in g})

    @property
    def rating_range(self) -> Tuple[float, float]:
        return (self.range_min, self.range_max)

    def ratings(self) -> Iterator[Tuple[int, int, float]]:
        for u, i, v in zip(self.user.tolist(), self.item.tolist(), self.value.tolist()):
            yield u, i, v

    def with_ratings(self, user, item, value) -> "InteractionDataset":
        """Same id space and genres, different rating set."""
        return InteractionDataset(
            self.n_users, self.n_items, user, item, value, self.genres_of,
            self.range_min, self.range_max, self.user_ids, self.item_ids,
            self.genre_ids, self.ignored_genre_items)

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[int, int, float]], n_users: int,
                     n_items: int, genres_of: Sequence[Iterable[int]] = None,
                     rating_range: Tuple[float, float] = (1.0, 5.0)) -> "InteractionDataset":
        """Build a dataset from internal-id triples; external keys are the ids."""
        triples = list(triples)
        if genres_of is None:
            genres_of = [()] * n_items
        genres_of = [frozenset(g) for g in genres_of]
        n_genre_ids = max((c for g in genres_of for c in g), default=-1) + 1
        u = [t[0] for t in triples]
        i = [t[1] for t in triples]
        v = [float(t[2]) for t in triples]
        return cls(n_users, n_items, u, i, v, tuple(genres_of),
                   float(rating_range[0]), float(rating_range[1]),
                   IdMap.dense(n_users), IdMap.dense(n_items), IdMap.dense(n_genre_ids))


class SparseMatrix:
    """User x item matrix of observed ratings with row and column indexes.

    Entries are stored twice: CSR (row-major, columns ascending within a
    row) and CSC (column-major, rows ascending within a column), so both
    a user's profile and an item's raters iterate in O(degree).
    """

    def __init__(self, n_rows: int, n_cols: int, rows, cols, values,
                 rating_range: Tuple[float, float] = None):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        self.shape = (int(n_rows), int(n_cols))

        order = np.lexsort((cols, rows))
        self.row_of = _frozen(rows[order], np.int64)
        self.indices = _frozen(cols[order], np.int64)
        self.data = _frozen(values[order], np.float64)
        self.indptr = _frozen(_indptr(self.row_of, n_rows), np.int64)

        corder = np.lexsort((rows, cols))
        self.col_of = _frozen(cols[corder], np.int64)
        self.col_indices = _frozen(rows[corder], np.int64)
        self.col_data = _frozen(values[corder], np.float64)
        self.col_indptr = _frozen(_indptr(self.col_of, n_cols), np.int64)

        if rating_range is None:
            if values.size:
                rating_range = (float(values.min()), float(values.max()))
            else:
                rating_range = (0.0, 1.0)
        self.rating_range = (float(rating_range[0]), float(rating_range[1]))

    @classmethod
    def from_dense(cls, array, mask=None, rating_range=None) -> "SparseMatrix":
        """Observed entries are ``mask`` (default: nonzero) positions of ``array``."""
        array = np.asarray(array, dtype=np.float64)
        if mask is None:
            mask = array != 0
        r, c = np.nonzero(mask)
        return cls(array.shape[0], array.shape[1], r, c, array[r, c], rating_range)

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    def row(self, u: int) -> Tuple[np.ndarray, np.ndarray]:
        """(item ids, values) of row ``u``, items ascending."""
        s, e = self.indptr[u], self.indptr[u + 1]
        return self.indices[s:e], self.data[s:e]

    def col(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        """(user ids, values) of column ``i``, users ascending."""
        s, e = self.col_indptr[i], self.col_indptr[i + 1]
        return self.col_indices[s:e], self.col_data[s:e]

    def row_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def col_counts(self) -> np.ndarray:
        return np.diff(self.col_indptr)

    def entries(self) -> Iterator[Tuple[int, int, float]]:
        """All (row, col, value) entries in row-major order."""
        return zip(self.row_of.tolist(), self.indices.tolist(), self.data.tolist())

    def col_entries(self) -> Iterator[Tuple[int, int, float]]:
        """All (row, col, value) entries in column-major order."""
        return zip(self.col_indices.tolist(), self.col_of.tolist(), self.col_data.tolist())

    def to_dense(self) -> Tuple[np.ndarray, np.ndarray]:
        """Dense (values, observed mask) pair."""
        values = np.zeros(self.shape)
        mask = np.zeros(self.shape, dtype=bool)
        values[self.row_of, self.indices] = self.data
        mask[self.row_of, self.indices] = True
        return values, mask

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def _indptr(sorted_keys: np.ndarray, n: int) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(np.bincount(sorted_keys, minlength=n))))


def build_matrix(dataset: InteractionDataset) -> SparseMatrix:
    """Row ``u`` of the result is user ``u``'s rating profile."""
    return SparseMatrix(dataset.n_users, dataset.n_items, dataset.user,
                        dataset.item, dataset.value, dataset.rating_range)


def genre_distribution(items: Sequence[int], dataset) -> Dict[int, float]:
    """Genre mass of an item set.

    Each item spreads unit weight evenly over its genres; genre-less items
    contribute nothing. Returns ``{}`` when no item carries a genre.

    ``dataset`` may be an :class:`InteractionDataset` or any sequence of
    per-item genre sets.
    """
    genres_of = getattr(dataset, "genres_of", dataset)
    items = list(items)
    if not items:
        raise DatasetError("empty item set")
    mass: Dict[int, float] = {}
    for i in items:
        g = genres_of[i]
        if not g:
            continue
        w = 1.0 / len(g)
        for c in sorted(g):
            mass[c] = mass.get(c, 0.0) + w
    total = sum(mass.values())
    return {c: m / total for c, m in sorted(mass.items())}
