"""Synthetic popularity-skewed rating data.

Items get a hidden popularity rank (a seeded permutation, so item ids carry
no popularity signal). Each user mixes a Zipf law over ranks with the uniform
law, weighted by a per-user ``popularity_affinity`` drawn from U(0, 1).
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Tuple

import numpy as np

from .core import IdMap, InteractionDataset

MIN_PROFILE = 5


@dataclass(frozen=True)
class SynthConfig:
    users: int = 300
    items: int = 500
    genres: int = 10
    zipf_exponent: float = 1.0
    mean_profile_size: int = 40
    rating_range: Tuple[float, float] = (1.0, 5.0)
    seed: int = 42

    def __post_init__(self):
        for name in ("users", "items", "genres", "mean_profile_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.zipf_exponent > 0:
            raise ValueError("zipf_exponent must be > 0")
        if self.mean_profile_size > self.items:
            raise ValueError("mean_profile_size cannot exceed items")
        if MIN_PROFILE > self.items:
            raise ValueError(f"need at least {MIN_PROFILE} items")
        lo, hi = self.rating_range
        if not lo < hi:
            raise ValueError(f"invalid rating range {self.rating_range}")

    def as_dict(self):
        return asdict(self)


def zipf_weights(n: int, exponent: float) -> np.ndarray:
    """Normalized weights proportional to 1 / rank**exponent, rank = 1..n."""
    w = 1.0 / np.arange(1, n + 1, dtype=np.float64) ** exponent
    return w / w.sum()


def _draw_ratings(rng, size, lo, hi):
    if float(lo).is_integer() and float(hi).is_integer():
        return rng.integers(int(lo), int(hi) + 1, size=size).astype(np.float64)
    return rng.uniform(lo, hi, size=size)


def generate(config: SynthConfig = SynthConfig(), return_affinity: bool = False):
    """Sample a dataset; identical ``config`` gives identical output.

    With ``return_affinity`` the per-user affinity array is returned as well.
    """
    rng = np.random.default_rng(config.seed)
    n_users, n_items = config.users, config.items
    lo, hi = map(float, config.rating_range)

    rank_to_item = rng.permutation(n_items)
    item_genre = rng.integers(0, config.genres, size=n_items)
    affinity = rng.uniform(0.0, 1.0, size=n_users)
    sizes = np.clip(rng.poisson(config.mean_profile_size, size=n_users), MIN_PROFILE, n_items)

    zipf_cdf = np.cumsum(zipf_weights(n_items, config.zipf_exponent))
    uniform_cdf = np.arange(1, n_items + 1, dtype=np.float64) / n_items

    users, items = [], []
    for u in range(n_users):
        a = affinity[u]
        cdf = a * zipf_cdf + (1.0 - a) * uniform_cdf
        cdf[-1] = 1.0
        target = int(sizes[u])
        chosen = np.zeros(n_items, dtype=bool)
        picked = []
        while len(picked) < target:
            draws = np.searchsorted(cdf, rng.random(target - len(picked)), side="right")
            for r in draws.tolist():
                if not chosen[r] and len(picked) < target:
                    chosen[r] = True
                    picked.append(r)
        users.extend([u] * target)
        items.extend(rank_to_item[picked].tolist())

    values = _draw_ratings(rng, len(users), lo, hi)

    # relabel items and genres in first-appearance order (and drop never-drawn
    # items) so the dataset survives a write/load round trip unchanged
    items = np.asarray(items, dtype=np.int64)
    _, first = np.unique(items, return_index=True)
    appearance = items[np.sort(first)]
    new_id = np.full(n_items, -1, dtype=np.int64)
    new_id[appearance] = np.arange(appearance.size)
    genre_map = {}
    genres_of = []
    for old in appearance.tolist():
        g = int(item_genre[old])
        genres_of.append(frozenset((genre_map.setdefault(g, len(genre_map)),)))

    ds = InteractionDataset(
        n_users, int(appearance.size), users, new_id[items], values, tuple(genres_of), lo, hi,
        IdMap.dense(n_users, "u"), IdMap(tuple(f"i{i}" for i in appearance.tolist())),
        IdMap(tuple(f"g{g}" for g in genre_map)))
    if return_affinity:
        return ds, affinity
    return ds
