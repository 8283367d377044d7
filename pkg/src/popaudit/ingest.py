"""Reading and writing the tab-separated dataset format, summary statistics
and the per-user train/test split.

Ratings file: ``user<TAB>item<TAB>value`` per line.
Genre file:   ``item<TAB>genre1,genre2,...`` per line.
Lines starting with ``#`` and blank lines are skipped.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass, asdict
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import DatasetError, IdMap, InteractionDataset

log = logging.getLogger(__name__)

MIN_TEST_PROFILE = 5


class ParseError(DatasetError):
    def __init__(self, path, lineno: int, msg: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {msg}")


@dataclass(frozen=True)
class DatasetStatistics:
    n_users: int
    n_items: int
    n_ratings: int
    n_genres: int
    ratings_per_user: float
    ratings_per_item: float
    sparsity: float
    range_min: float
    range_max: float

    def as_dict(self):
        return asdict(self)


def _lines(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            yield lineno, line


def load_dataset(ratings_path, genres_path=None, rating_range: Tuple[float, float] = (1.0, 5.0),
                 columns: Optional[Sequence[int]] = None,
                 genre_columns: Optional[Sequence[int]] = None) -> InteractionDataset:
    """Parse a ratings file and optional genre file.

    Parameters
    ----------
    ratings_path, genres_path : path-like
        Tab-separated inputs. ``genres_path`` may be None for genre-less data.
    rating_range : (float, float)
        Valid closed rating interval; values outside raise.
    columns : (user, item, value) column indexes, optional
        Override for exports with extra columns. Without it, exactly three
        fields per line are required.
    genre_columns : (item, genres) column indexes, optional
        Same for the genre file.
    """
    lo, hi = float(rating_range[0]), float(rating_range[1])
    if not lo < hi:
        raise DatasetError(f"invalid rating range [{lo}, {hi}]")
    for p in (ratings_path, genres_path):
        if p is not None and not os.path.isfile(p):
            raise FileNotFoundError(f"no such file: {p}")

    ucol, icol, vcol = columns if columns is not None else (0, 1, 2)
    need = max(ucol, icol, vcol) + 1

    users, items = {}, {}
    seen = set()
    u_arr, i_arr, v_arr = [], [], []
    for lineno, line in _lines(ratings_path):
        fields = line.split("\t")
        if (columns is None and len(fields) != 3) or len(fields) < need:
            raise ParseError(ratings_path, lineno,
                             f"expected 3 tab-separated fields, got {len(fields)}")
        try:
            value = float(fields[vcol])
        except ValueError:
            raise ParseError(ratings_path, lineno,
                             f"non-numeric rating {fields[vcol]!r}") from None
        if not math.isfinite(value):
            raise ParseError(ratings_path, lineno, f"non-numeric rating {fields[vcol]!r}")
        if value < lo or value > hi:
            raise ParseError(ratings_path, lineno,
                             f"rating {fields[vcol]} outside range [{lo:g}, {hi:g}]")
        u = users.setdefault(fields[ucol], len(users))
        i = items.setdefault(fields[icol], len(items))
        if (u, i) in seen:
            raise ParseError(ratings_path, lineno,
                             f"duplicate rating for ({fields[ucol]}, {fields[icol]})")
        seen.add((u, i))
        u_arr.append(u)
        i_arr.append(i)
        v_arr.append(value)

    genres = {}
    genres_of = [set() for _ in items]
    ignored = 0
    if genres_path is not None:
        gi, gc = genre_columns if genre_columns is not None else (0, 1)
        gneed = max(gi, gc) + 1
        for lineno, line in _lines(genres_path):
            fields = line.split("\t")
            if len(fields) == gneed - 1 and gc == gneed - 1:
                fields.append("")  # item with no genre list
            if (genre_columns is None and len(fields) != 2) or len(fields) < gneed:
                raise ParseError(genres_path, lineno,
                                 f"expected 2 tab-separated fields, got {len(fields)}")
            i = items.get(fields[gi])
            if i is None:
                ignored += 1
                continue
            for name in fields[gc].split(","):
                name = name.strip()
                if name:
                    genres_of[i].add(genres.setdefault(name, len(genres)))
        if ignored:
            log.warning("%d genre lines reference items without ratings; ignored", ignored)

    return InteractionDataset(
        len(users), len(items), u_arr, i_arr, v_arr, tuple(genres_of), lo, hi,
        IdMap(tuple(users)), IdMap(tuple(items)), IdMap(tuple(genres)), ignored)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_dataset(dataset: InteractionDataset, ratings_path, genres_path) -> None:
    """Write ``dataset`` in the canonical format; reloading yields the same data."""
    uk, ik, gk = dataset.user_ids.keys, dataset.item_ids.keys, dataset.genre_ids.keys
    with open(ratings_path, "w", encoding="utf-8", newline="\n") as fh:
        for u, i, v in dataset.ratings():
            fh.write(f"{uk[u]}\t{ik[i]}\t{_fmt(v)}\n")
    with open(genres_path, "w", encoding="utf-8", newline="\n") as fh:
        for i, g in enumerate(dataset.genres_of):
            if g:
                fh.write(f"{ik[i]}\t{','.join(gk[c] for c in sorted(g))}\n")


def compute_statistics(dataset: InteractionDataset) -> DatasetStatistics:
    nu, ni, nr = dataset.n_users, dataset.n_items, dataset.n_ratings
    if nu == 0 or ni == 0:
        raise DatasetError("empty dataset")
    return DatasetStatistics(
        n_users=nu, n_items=ni, n_ratings=nr, n_genres=dataset.n_genres,
        ratings_per_user=nr / nu, ratings_per_item=nr / ni,
        sparsity=1.0 - nr / (nu * ni),
        range_min=dataset.range_min, range_max=dataset.range_max)


def train_test_split(dataset: InteractionDataset, test_fraction: float = 0.2,
                     seed: int = 42) -> Tuple[InteractionDataset, InteractionDataset]:
    """Random per-user holdout.

    Each user with at least ``MIN_TEST_PROFILE`` ratings sends
    ``round(test_fraction * size)`` of them to test (half rounds up, capped
    so one rating stays in train); smaller profiles stay whole in train.
    Result depends only on the rating set and ``seed``, not input order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    order = np.lexsort((dataset.item, dataset.user))
    users = dataset.user[order]
    bounds = np.concatenate(([0], np.cumsum(np.bincount(users, minlength=dataset.n_users))))
    is_test = np.zeros(order.size, dtype=bool)
    for u in range(dataset.n_users):
        s, e = bounds[u], bounds[u + 1]
        size = e - s
        if size < MIN_TEST_PROFILE:
            continue
        n_test = min(int(math.floor(test_fraction * size + 0.5)), size - 1)
        picked = rng.permutation(size)[:n_test]
        is_test[s + picked] = True
    tr, te = order[~is_test], order[is_test]
    train = dataset.with_ratings(dataset.user[tr], dataset.item[tr], dataset.value[tr])
    test = dataset.with_ratings(dataset.user[te], dataset.item[te], dataset.value[te])
    return train, test


def write_statistics_csv(stats: DatasetStatistics, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        d = stats.as_dict()
        w.writerow(list(d))
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in d.values()])
