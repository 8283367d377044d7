"""Group aggregation, Welch's t-test and the popularity vs. recommendation
frequency correlation."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from .metrics import UserMetricRow, popularity_lift
from .stratify import GROUPS

SIGNIFICANCE = 0.05
METRICS = ("mae", "mc", "pl")


class StatsError(ValueError):
    pass


# --- Student t distribution -------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise StatsError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return min(1.0, max(0.0, betainc(df / 2.0, 0.5, x)))


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Two-sided Welch (unequal variance) t-test. Returns (t, p)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise StatsError("each sample needs at least 2 values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va == 0.0 and vb == 0.0:
        raise StatsError("zero variance in both samples")
    se2 = va + vb
    t = float((a.mean() - b.mean()) / math.sqrt(se2))
    # df is scale-free; normalising keeps va**2 from underflowing
    ra, rb = va / max(va, vb), vb / max(va, vb)
    df = (ra + rb) ** 2 / (ra * ra / (a.size - 1) + rb * rb / (b.size - 1))
    return t, t_sf_two_sided(t, df)


# --- popularity vs recommendation frequency ---------------------------------

@dataclass(frozen=True, eq=False)
class PopFreqSeries:
    popularity: np.ndarray
    frequency: np.ndarray
    pearson: float
    spearman: float


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("correlation undefined for a constant variable")
    return float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def recommendation_frequency(lists, n_items: int) -> np.ndarray:
    freq = np.zeros(n_items, dtype=np.int64)
    for rl in lists:
        items = getattr(rl, "items", rl)
        np.add.at(freq, np.asarray(items, dtype=np.int64), 1)
    return freq


def pop_freq_correlation(lists, train) -> PopFreqSeries:
    """Correlate train interaction counts with top-n appearance counts over
    the whole catalog. ``train`` is an InteractionDataset or SparseMatrix."""
    if hasattr(train, "col_counts"):
        popularity = train.col_counts().astype(np.int64)
    else:
        popularity = np.bincount(train.item, minlength=train.n_items)
    freq = recommendation_frequency(lists, popularity.size)
    if not freq.any():
        raise StatsError("no item was recommended")
    if np.count_nonzero(freq) < 2:
        raise StatsError("need at least 2 recommended items")
    return PopFreqSeries(popularity, freq, pearson(popularity, freq),
                         spearman(popularity, freq))


def write_pop_freq_csv(series: PopFreqSeries, path, item_keys=None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item", "popularity", "frequency"])
        for i, (p, f) in enumerate(zip(series.popularity.tolist(), series.frequency.tolist())):
            w.writerow([item_keys[i] if item_keys is not None else i, p, f])


# --- group report -----------------------------------------------------------

@dataclass(frozen=True)
class GroupRow:
    group: str
    users: int
    mae: float
    mc: float
    pl: float
    gap_p: float
    gap_q: float


@dataclass(frozen=True)
class GroupReport:
    """Per-group metrics; ``pvalues[(metric, other)]`` compares LowPop with
    ``other``. PL has no per-user distribution, so its p-values are None."""

    rows: Dict[str, GroupRow]
    pvalues: Dict[Tuple[str, str], Optional[float]]
    worst: Dict[str, str]
    title: str = ""

    def significant(self, metric: str, other: str) -> bool:
        p = self.pvalues.get((metric, other))
        return p is not None and p < SIGNIFICANCE

    def low_significant(self, metric: str) -> bool:
        """LowPop differs significantly from both other groups."""
        return all(self.significant(metric, g) for g in GROUPS[1:])


def _compare(a, b) -> Optional[float]:
    if len(a) < 2 or len(b) < 2:
        return None
    try:
        return welch_t_test(a, b)[1]
    except StatsError:
        # both samples constant
        return 1.0 if np.mean(a) == np.mean(b) else 0.0


def _mean(vals):
    return float(np.mean(vals)) if len(vals) else float("nan")


def build_group_report(rows: Sequence[UserMetricRow],
                       gaps: Mapping[str, Tuple[float, float]], title: str = "") -> GroupReport:
    """Aggregate per-user rows into the three-group table.

    ``gaps`` maps group label -> (GAP_p, GAP_q) used for the group-level lift.
    """
    by_group = {g: [r for r in rows if r.group == g] for g in GROUPS}
    missing = [g for g in GROUPS if not by_group[g] or g not in gaps]
    if missing:
        raise StatsError(f"missing group(s): {', '.join(missing)}")
    values = {g: {"mae": [r.mae for r in rs if r.mae is not None],
                  "mc": [r.mc for r in rs if r.mc is not None]}
              for g, rs in by_group.items()}
    out = {}
    for g in GROUPS:
        gp, gq = gaps[g]
        out[g] = GroupRow(g, len(by_group[g]), _mean(values[g]["mae"]),
                          _mean(values[g]["mc"]), popularity_lift(gp, gq), gp, gq)
    pvalues = {}
    for other in GROUPS[1:]:
        for m in ("mae", "mc"):
            pvalues[(m, other)] = _compare(values["LowPop"][m], values[other][m])
        pvalues[("pl", other)] = None
    worst = {}
    for m in METRICS:
        means = [getattr(out[g], m) for g in GROUPS]
        if all(math.isnan(v) for v in means):
            continue
        worst[m] = GROUPS[int(np.nanargmax(means))]
    return GroupReport(out, pvalues, worst, title)


def _num(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def write_report_csv(report: GroupReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "users", "mae", "mc", "pl", "gap_p", "gap_q",
                    "mae_p", "mc_p", "pl_p", "mae_sig", "mc_sig", "pl_sig", "worst"])
        for g in GROUPS:
            r = report.rows[g]
            if g == "LowPop":
                ps = ["", "", ""]
                sig = [int(report.low_significant("mae")), int(report.low_significant("mc")), "NA"]
            else:
                ps = [_num(report.pvalues[("mae", g)]), _num(report.pvalues[("mc", g)]), "NA"]
                sig = [int(report.significant("mae", g)), int(report.significant("mc", g)), "NA"]
            worst = ";".join(m for m in METRICS if report.worst.get(m) == g)
            w.writerow([g, r.users, _num(r.mae), _num(r.mc), _num(r.pl), _num(r.gap_p),
                        _num(r.gap_q), *ps, *sig, worst])


def format_report_markdown(report: GroupReport, digits: int = 2) -> str:
    """Aligned markdown table: worst value per metric in bold, ``*`` on
    LowPop when it differs from both other groups at p < 0.05."""
    header = ["Group", "MAE", "MC", "PL"]
    body = []
    for g in GROUPS:
        r = report.rows[g]
        cells = [g]
        for m in METRICS:
            v = getattr(r, m)
            s = "n/a" if math.isnan(v) else f"{v:.{digits}f}"
            if report.worst.get(m) == g:
                s = f"**{s}**"
            if g == "LowPop" and m != "pl" and report.low_significant(m):
                s += "*"
            cells.append(s)
        body.append(cells)
    widths = [max(len(row[c]) for row in [header] + body) for c in range(len(header))]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    out = []
    if report.title:
        out += [f"### {report.title}", ""]
    out.append(line(header))
    out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    out += [line(c) for c in body]
    out.append("")
    out.append("Welch t-test p-values, LowPop vs. other group (PL: group-level, not tested):")
    out.append("")
    for other in GROUPS[1:]:
        ps = ", ".join(f"{m.upper()} {_fmt_p(report.pvalues[(m, other)])}" for m in ("mae", "mc"))
        out.append(f"- vs {other}: {ps}")
    return "\n".join(out) + "\n"


def _fmt_p(p):
    return "n/a" if p is None else f"{p:.3g}"
