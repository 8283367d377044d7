"""Run configuration: ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import os
from dataclasses import dataclass, fields, asdict
from typing import Dict, List, Mapping, Optional, Tuple

OUTPUT_DIR_ENV = "AUDIT_OUTPUT_DIR"
ALGORITHMS = ("userknn", "nmf")


class ConfigError(ValueError):
    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _columns(text: str) -> Tuple[int, ...]:
    cols = tuple(int(c) for c in text.split(","))
    if any(c < 0 for c in cols):
        raise ValueError("negative column index")
    return cols


@dataclass(frozen=True)
class RunConfig:
    # input: a ratings file, or a synthetic dataset when ratings is empty
    ratings: Optional[str] = None
    genres: Optional[str] = None
    range_min: float = 1.0
    range_max: float = 5.0
    ratings_columns: Optional[Tuple[int, ...]] = None
    genres_columns: Optional[Tuple[int, ...]] = None
    synth_users: int = 300
    synth_items: int = 500
    synth_genres: int = 10
    synth_zipf: float = 1.0
    synth_profile_size: int = 40
    # protocol
    algorithms: Tuple[str, ...] = ALGORITHMS
    k: int = 40
    factors: int = 15
    iterations: int = 200
    n: int = 10
    test_fraction: float = 0.2
    alpha: float = 0.01
    seed: int = 42
    popularity_source: str = "train"
    output_dir: str = "audit-out"

    def as_dict(self) -> Dict:
        d = asdict(self)
        for key in ("algorithms", "ratings_columns", "genres_columns"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d


HELP = {
    "ratings": "ratings file (user<TAB>item<TAB>value); empty = synthetic data",
    "genres": "genre file (item<TAB>g1,g2,...)",
    "range_min": "lowest valid rating",
    "range_max": "highest valid rating",
    "ratings_columns": "user,item,value column indexes in the ratings file",
    "genres_columns": "item,genres column indexes in the genre file",
    "synth_users": "synthetic users",
    "synth_items": "synthetic items",
    "synth_genres": "synthetic genres",
    "synth_zipf": "Zipf exponent of synthetic item popularity",
    "synth_profile_size": "mean synthetic profile size",
    "algorithms": "userknn, nmf or both",
    "k": "UserKNN neighbourhood size",
    "factors": "NMF latent factors",
    "iterations": "NMF update iterations",
    "n": "recommendation list length",
    "test_fraction": "per-user share of ratings held out",
    "alpha": "miscalibration smoothing weight",
    "seed": "random seed for split, synthetic data and NMF init",
    "popularity_source": "compute popularity on 'train' or 'full' data",
    "output_dir": f"output directory (env {OUTPUT_DIR_ENV} overrides the file)",
}


def _parse_algorithms(text: str) -> Tuple[str, ...]:
    text = text.strip().lower()
    if text == "both":
        return ALGORITHMS
    algos = tuple(a.strip() for a in text.split(",") if a.strip())
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad or not algos:
        raise ValueError(f"unknown algorithm(s) {bad or text!r}")
    return tuple(a for a in ALGORITHMS if a in algos)


def _optional_path(text: str) -> Optional[str]:
    return text.strip() or None


PARSERS = {
    "ratings": _optional_path, "genres": _optional_path,
    "range_min": float, "range_max": float,
    "ratings_columns": _columns, "genres_columns": _columns,
    "synth_users": int, "synth_items": int, "synth_genres": int,
    "synth_zipf": float, "synth_profile_size": int,
    "algorithms": _parse_algorithms,
    "k": int, "factors": int, "iterations": int, "n": int,
    "test_fraction": float, "alpha": float, "seed": int,
    "popularity_source": lambda s: s.strip().lower(),
    "output_dir": str,
}


def parse_config_text(text: str) -> Dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment line."""
    raw = {}
    problems = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    if problems:
        raise ConfigError(problems)
    return raw


def _range_problems(c: RunConfig) -> List[str]:
    p = []
    if not c.range_min < c.range_max:
        p.append("range_min must be < range_max")
    for name in ("k", "factors", "iterations", "n", "synth_users", "synth_items",
                 "synth_genres", "synth_profile_size"):
        if getattr(c, name) < 1:
            p.append(f"{name} must be >= 1")
    if not 0.0 < c.test_fraction < 1.0:
        p.append("test_fraction must be in (0, 1)")
    if not 0.0 < c.alpha < 1.0:
        p.append("alpha must be in (0, 1)")
    if not c.synth_zipf > 0:
        p.append("synth_zipf must be > 0")
    if c.synth_profile_size > c.synth_items:
        p.append("synth_profile_size must be <= synth_items")
    if c.popularity_source not in ("train", "full"):
        p.append("popularity_source must be 'train' or 'full'")
    if c.ratings_columns is not None and len(c.ratings_columns) != 3:
        p.append("ratings_columns needs 3 indexes")
    if c.genres_columns is not None and len(c.genres_columns) != 2:
        p.append("genres_columns needs 2 indexes")
    if c.genres and not c.ratings:
        p.append("genres given without ratings")
    return p


def validate_config(text: str = "", overrides: Optional[Mapping[str, str]] = None,
                    environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """Merge file text, environment and overrides (highest precedence) into a
    RunConfig, reporting every problem at once."""
    environ = os.environ if environ is None else environ
    problems = []
    try:
        raw = parse_config_text(text)
    except ConfigError as e:
        problems += e.problems
        raw = {}
    if environ.get(OUTPUT_DIR_ENV):
        raw["output_dir"] = environ[OUTPUT_DIR_ENV]
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = str(value)

    known = {f.name for f in fields(RunConfig)}
    values = {}
    for key, text_value in raw.items():
        if key not in known:
            problems.append(f"unknown key {key!r}")
            continue
        try:
            values[key] = PARSERS[key](text_value)
        except ValueError as e:
            problems.append(f"{key}: cannot parse {text_value!r} ({e})")
    # range checks run on whatever parsed, so one pass reports everything
    config = RunConfig(**values)
    problems += _range_problems(config)
    if problems:
        raise ConfigError(problems)
    return config


def load_config(path: Optional[str], overrides=None, environ=None) -> RunConfig:
    text = ""
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError([f"cannot read config {path}: {e.strerror}"]) from None
    return validate_config(text, overrides, environ)
