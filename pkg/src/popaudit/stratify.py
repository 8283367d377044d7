"""Item popularity, per-user popularity inclination and the three-way user
split into LowPop / MedPop / HighPop."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .core import DatasetError, InteractionDataset

GROUPS = ("LowPop", "MedPop", "HighPop")


@dataclass(frozen=True, eq=False)
class PopularityProfile:
    """``item_popularity[i]``: share of users who rated ``i``.
    ``user_inclination[u]``: mean item popularity over ``u``'s profile, NaN
    for users without ratings.
    """

    item_popularity: np.ndarray
    user_inclination: np.ndarray
    item_count: np.ndarray

    def defined_users(self) -> np.ndarray:
        return np.flatnonzero(~np.isnan(self.user_inclination))


@dataclass(frozen=True)
class UserGroups:
    low: Tuple[int, ...]
    med: Tuple[int, ...]
    high: Tuple[int, ...]

    def as_dict(self) -> Dict[str, Tuple[int, ...]]:
        return dict(zip(GROUPS, (self.low, self.med, self.high)))

    def label_of(self) -> Dict[int, str]:
        return {u: g for g, members in self.as_dict().items() for u in members}


def popularity_profile(train: InteractionDataset) -> PopularityProfile:
    if train.n_ratings == 0 or train.n_users == 0:
        raise DatasetError("empty dataset")
    # at most one rating per (user, item), so rating counts are distinct users
    count = np.bincount(train.item, minlength=train.n_items)
    pop = count / train.n_users
    sums = np.bincount(train.user, weights=pop[train.item], minlength=train.n_users)
    sizes = np.bincount(train.user, minlength=train.n_users)
    with np.errstate(invalid="ignore", divide="ignore"):
        incl = np.where(sizes > 0, sums / np.maximum(sizes, 1), np.nan)
    for a in (pop, incl, count):
        a.flags.writeable = False
    return PopularityProfile(pop, incl, count)


def split_groups(profile: PopularityProfile) -> UserGroups:
    """Thirds of the users ordered by (inclination, user id), lowest first."""
    users = profile.defined_users()
    n = users.size
    if n < 3:
        raise DatasetError(f"need at least 3 users with a profile, got {n}")
    order = users[np.lexsort((users, profile.user_inclination[users]))]
    a, b = n // 3, (2 * n) // 3
    return UserGroups(tuple(order[:a].tolist()), tuple(order[a:b].tolist()),
                      tuple(order[b:].tolist()))


def write_groups_csv(profile: PopularityProfile, groups: UserGroups, path, user_keys=None) -> None:
    labels = groups.label_of()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "inclination", "group"])
        for u in sorted(labels):
            key = user_keys[u] if user_keys is not None else u
            w.writerow([key, repr(float(profile.user_inclination[u])), labels[u]])
