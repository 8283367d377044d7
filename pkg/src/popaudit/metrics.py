"""Accuracy, calibration and popularity metrics at user and group level."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class UserMetricRow:
    user: int
    group: str
    mae: Optional[float]
    mc: Optional[float]
    gap_p: float
    gap_q: Optional[float]

    @property
    def lift(self) -> Optional[float]:
        if self.gap_q is None or not self.gap_p > 0:
            return None
        return (self.gap_q - self.gap_p) / self.gap_p


def mae(predictions: Iterable[Tuple[float, float]]) -> float:
    """Mean absolute error over (predicted, actual) pairs."""
    pairs = np.asarray(list(predictions), dtype=np.float64)
    if pairs.size == 0:
        raise MetricError("no test ratings")
    return float(np.mean(np.abs(pairs[:, 0] - pairs[:, 1])))


def kl_miscalibration(p: Mapping[int, float], q: Mapping[int, float],
                      alpha: float = 0.01) -> float:
    """KL(p || q~) with q~ = (1 - alpha) q + alpha p, natural log.

    The smoothing keeps q~ positive wherever p is, so the value is finite.
    """
    if not p:
        raise MetricError("user has no genre-tagged profile")
    if not 0.0 < alpha < 1.0:
        raise MetricError(f"alpha must be in (0, 1), got {alpha}")
    total = 0.0
    for c, pc in p.items():
        if pc <= 0.0:
            continue
        qc = (1.0 - alpha) * q.get(c, 0.0) + alpha * pc
        total += pc * math.log(pc / qc)
    # rounding can leave a tiny negative when q~ == p
    return max(total, 0.0)


def _mean_popularity(items, popularity) -> float:
    return float(np.mean(popularity[np.asarray(items, dtype=np.int64)]))


def gap(item_lists: Sequence[Sequence[int]], profile) -> float:
    """Group average popularity: per-user mean item popularity, averaged over users.

    ``item_lists`` is a sequence of per-user item sequences, or a mapping
    user -> items (then errors name the user).
    """
    popularity = getattr(profile, "item_popularity", profile)
    popularity = np.asarray(popularity, dtype=np.float64)
    pairs = item_lists.items() if isinstance(item_lists, Mapping) else enumerate(item_lists)
    means = []
    for user, items in pairs:
        if len(items) == 0:
            raise MetricError(f"empty item list for user {user}")
        means.append(_mean_popularity(items, popularity))
    if not means:
        raise MetricError("no users")
    return float(np.mean(means))


def popularity_lift(gap_p: float, gap_q: float) -> float:
    """(GAP_q - GAP_p) / GAP_p; positive when recommendations are more popular."""
    if gap_p == 0:
        raise MetricError("undefined lift for zero profile popularity")
    return (gap_q - gap_p) / gap_p


def _cell(v) -> str:
    return "" if v is None else repr(float(v))


def write_user_metrics_csv(rows: Sequence[UserMetricRow], path, user_keys=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "group", "mae", "mc", "gap_p", "gap_q"])
        for r in rows:
            key = user_keys[r.user] if user_keys is not None else r.user
            w.writerow([key, r.group, _cell(r.mae), _cell(r.mc), _cell(r.gap_p),
                        _cell(r.gap_q)])


def write_user_lift_csv(rows: Sequence[UserMetricRow], path, user_keys=None) -> None:
    """Per-user (gap_q - gap_p) / gap_p, for testing lift at user level."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "group", "pl"])
        for r in rows:
            key = user_keys[r.user] if user_keys is not None else r.user
            w.writerow([key, r.group, _cell(r.lift)])
