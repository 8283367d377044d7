"""End-to-end audit: ingest, split, stratify, train, recommend, evaluate, report."""
from __future__ import annotations

import hashlib
import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import scipy

from . import __version__, _backend
from .analysis import (GroupReport, PopFreqSeries, build_group_report, format_report_markdown,
                       pop_freq_correlation, write_pop_freq_csv, write_report_csv)
from .config import RunConfig
from .core import InteractionDataset, build_matrix, genre_distribution
from .ingest import (DatasetStatistics, compute_statistics, load_dataset, train_test_split,
                     write_statistics_csv)
from .metrics import (UserMetricRow, gap, kl_miscalibration, write_user_lift_csv,
                      write_user_metrics_csv)
from .recommenders import knn_fit, nmf_fit, top_n
from .stratify import popularity_profile, split_groups, write_groups_csv
from .synth import SynthConfig, generate

log = logging.getLogger(__name__)

INCOMPLETE_MARKER = "RUN.incomplete"
MANIFEST = "manifest.json"

PROTOCOL_NOTES = [
    "MAE from held-out rating prediction on a random per-user split",
    "popularity = share of users who rated the item",
    "groups = thirds of users by mean profile popularity",
    "MC = KL(p || (1-alpha) q + alpha p), natural log",
    "PL = (GAP_q - GAP_p) / GAP_p from group-level GAP",
    "t-test = two-sided Welch, LowPop vs each other group, on per-user MAE and MC",
]


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


@dataclass
class AlgorithmResult:
    rows: List[UserMetricRow]
    report: GroupReport
    correlation: PopFreqSeries
    lists: list


@dataclass
class AuditResult:
    statistics: DatasetStatistics
    results: Dict[str, AlgorithmResult] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    output_dir: Optional[Path] = None


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_input(config: RunConfig) -> InteractionDataset:
    if config.ratings:
        return load_dataset(config.ratings, config.genres,
                            (config.range_min, config.range_max),
                            columns=config.ratings_columns,
                            genre_columns=config.genres_columns)
    return generate(synth_config(config))


def synth_config(config: RunConfig) -> SynthConfig:
    return SynthConfig(users=config.synth_users, items=config.synth_items,
                       genres=config.synth_genres, zipf_exponent=config.synth_zipf,
                       mean_profile_size=config.synth_profile_size,
                       rating_range=(config.range_min, config.range_max), seed=config.seed)


def fit_model(algorithm: str, train_matrix, config: RunConfig):
    if algorithm == "userknn":
        return knn_fit(train_matrix, config.k)
    if algorithm == "nmf":
        return nmf_fit(train_matrix, config.factors, config.iterations, config.seed)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def evaluate(model, train, test, train_matrix, profile, groups, config: RunConfig):
    """Per-user metric rows, top-n lists and group GAP pairs for one model."""
    labels = groups.label_of()
    pop = profile.item_popularity
    test_matrix = build_matrix(test)
    rows, lists = [], []
    for u in sorted(labels):
        scores = model.predict_user(u)
        rl = top_n(model, u, config.n, train_matrix, scores=scores)
        lists.append(rl)
        t_items, t_vals = test_matrix.row(u)
        err = float(np.mean(np.abs(scores[t_items] - t_vals))) if t_items.size else None
        profile_items, _ = train_matrix.row(u)
        p = genre_distribution(profile_items, train)
        q = genre_distribution(rl.items, train) if len(rl) else {}
        mc = kl_miscalibration(p, q, config.alpha) if p and q else None
        gap_p = float(np.mean(pop[profile_items]))
        gap_q = float(np.mean(pop[list(rl.items)])) if len(rl) else None
        rows.append(UserMetricRow(u, labels[u], err, mc, gap_p, gap_q))
    gaps = {}
    by_user = {rl.user: rl for rl in lists}
    for g, members in groups.as_dict().items():
        prof = {u: train_matrix.row(u)[0] for u in members}
        recs = {u: by_user[u].items for u in members if len(by_user[u])}
        gaps[g] = (gap(prof, pop), gap(recs, pop))
    return rows, lists, gaps


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def run_audit(config: RunConfig) -> AuditResult:
    """Run every stage and write all artifacts to ``config.output_dir``.

    On failure, files written so far are removed and a ``RUN.incomplete``
    marker describing the error is left behind.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / INCOMPLETE_MARKER
    written: List[Path] = []

    def emit(name: str, writer):
        path = out / name
        written.append(path)
        writer(path)
        return path

    try:
        result = _run(config, out, emit)
    except BaseException as e:
        for p in written:
            if p.exists():
                p.unlink()
        marker.write_text(f"{e}\n", encoding="utf-8")
        raise
    if marker.exists():
        marker.unlink()
    return result


def _run(config: RunConfig, out: Path, emit) -> AuditResult:
    with _Stage("ingest"):
        dataset = load_input(config)
        stats = compute_statistics(dataset)
    result = AuditResult(stats, output_dir=out)
    user_keys, item_keys = dataset.user_ids.keys, dataset.item_ids.keys
    emit("dataset_statistics.csv", lambda p: write_statistics_csv(stats, p))

    with _Stage("split"):
        train, test = train_test_split(dataset, config.test_fraction, config.seed)
        train_matrix = build_matrix(train)

    with _Stage("stratify"):
        source = train if config.popularity_source == "train" else dataset
        profile = popularity_profile(source)
        groups = split_groups(profile)
    emit("user_groups.csv",
         lambda p: write_groups_csv(profile, groups, p, user_keys))

    correlations = {}
    for algo in config.algorithms:
        with _Stage(f"train:{algo}"):
            model = fit_model(algo, train_matrix, config)
        with _Stage(f"evaluate:{algo}"):
            rows, lists, gaps = evaluate(model, train, test, train_matrix, profile, groups, config)
            report = build_group_report(rows, gaps, title=algo)
        with _Stage(f"report:{algo}"):
            series = pop_freq_correlation(lists, train_matrix)
        result.results[algo] = AlgorithmResult(rows, report, series, lists)
        correlations[algo] = {"pearson": series.pearson, "spearman": series.spearman}
        emit(f"user_metrics_{algo}.csv", lambda p: write_user_metrics_csv(rows, p, user_keys))
        emit(f"user_lift_{algo}.csv", lambda p: write_user_lift_csv(rows, p, user_keys))
        emit(f"group_report_{algo}.csv", lambda p: write_report_csv(report, p))
        emit(f"group_report_{algo}.md",
             lambda p: p.write_text(format_report_markdown(report), encoding="utf-8"))
        emit(f"pop_freq_{algo}.csv", lambda p: write_pop_freq_csv(series, p, item_keys))

    outputs = {p.name: _sha256(p) for p in sorted(out.iterdir())
               if p.name not in (MANIFEST, INCOMPLETE_MARKER) and p.is_file()
               and p.name in _expected_names(config)}
    manifest = {
        "config": config.as_dict(),
        "seed": config.seed,
        "versions": {"popaudit": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__,
                     "kernels": _backend.BACKEND},
        "dataset": stats.as_dict(),
        "protocol": PROTOCOL_NOTES,
        "correlations": correlations,
        "outputs": outputs,
    }
    if config.ratings is None:
        manifest["synth"] = {k: (list(v) if isinstance(v, tuple) else v)
                             for k, v in synth_config(config).as_dict().items()}
    emit(MANIFEST, lambda p: p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8"))
    result.outputs = outputs
    return result


def _expected_names(config: RunConfig):
    names = {"dataset_statistics.csv", "user_groups.csv"}
    for a in config.algorithms:
        names |= {f"user_metrics_{a}.csv", f"user_lift_{a}.csv", f"group_report_{a}.csv",
                  f"group_report_{a}.md", f"pop_freq_{a}.csv"}
    return names
