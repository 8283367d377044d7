"""``audit`` command line: run, stats, synth.

Exit codes: 0 success, 2 configuration error, 3 input error, 4 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .analysis import format_report_markdown
from .config import HELP, ConfigError, RunConfig, load_config
from .core import DatasetError
from .ingest import compute_statistics, load_dataset, write_dataset, write_statistics_csv
from .pipeline import StageError, run_audit
from .synth import SynthConfig, generate

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("popaudit")


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _columns(text):
    return tuple(int(c) for c in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = _ArgumentParser(prog="audit", description="Popularity-bias audit for collaborative filtering.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    run = sub.add_parser("run", help="full audit: train, recommend, evaluate, report",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run.add_argument("--config", help="key = value config file")
    defaults = RunConfig()
    for f in fields(RunConfig):
        default = getattr(defaults, f.name)
        if isinstance(default, tuple):
            default = ",".join(map(str, default))
        run.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, metavar="VALUE",
                         help=f"{HELP[f.name]} (default: {default})")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="extra override, repeatable")

    st = sub.add_parser("stats", help="dataset statistics for a ratings file")
    st.add_argument("--ratings", required=True)
    st.add_argument("--genres")
    st.add_argument("--range", nargs=2, type=float, default=(1.0, 5.0), metavar=("MIN", "MAX"))
    st.add_argument("--columns", type=_columns, help="user,item,value column indexes")
    st.add_argument("--genre-columns", type=_columns, help="item,genres column indexes")
    st.add_argument("--csv", help="also write the statistics as CSV")

    sy = sub.add_parser("synth", help="write a synthetic popularity-skewed dataset",
                        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    d = SynthConfig()
    sy.add_argument("--out", required=True, help="output directory")
    sy.add_argument("--users", type=int, default=d.users)
    sy.add_argument("--items", type=int, default=d.items)
    sy.add_argument("--genres", type=int, default=d.genres)
    sy.add_argument("--zipf", type=float, default=d.zipf_exponent)
    sy.add_argument("--profile-size", type=int, default=d.mean_profile_size)
    sy.add_argument("--range", nargs=2, type=float, default=d.rating_range, metavar=("MIN", "MAX"))
    sy.add_argument("--seed", type=int, default=d.seed)
    return p


def _cmd_run(args) -> int:
    overrides = {f.name: getattr(args, f.name) for f in fields(RunConfig)
                 if getattr(args, f.name) is not None}
    for item in args.set:
        if "=" not in item:
            raise ConfigError([f"--set expects KEY=VALUE, got {item!r}"])
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    config = load_config(args.config, overrides)
    result = run_audit(config)
    for algo, res in result.results.items():
        print(format_report_markdown(res.report))
        print(f"popularity/frequency correlation ({algo}): "
              f"pearson {res.correlation.pearson:.3f}, spearman {res.correlation.spearman:.3f}\n")
    print(f"outputs written to {result.output_dir}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    ds = load_dataset(args.ratings, args.genres, tuple(args.range), columns=args.columns,
                      genre_columns=args.genre_columns)
    s = compute_statistics(ds)
    print(f"|U| {s.n_users}  |I| {s.n_items}  |R| {s.n_ratings}  |C| {s.n_genres}")
    print(f"|R|/|U| {s.ratings_per_user:.0f}  |R|/|I| {s.ratings_per_item:.0f}  "
          f"sparsity {s.sparsity:.3f}  range [{s.range_min:g}-{s.range_max:g}]")
    if ds.ignored_genre_items:
        print(f"ignored {ds.ignored_genre_items} genre lines for unknown items")
    if args.csv:
        write_statistics_csv(s, args.csv)
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        cfg = SynthConfig(users=args.users, items=args.items, genres=args.genres,
                          zipf_exponent=args.zipf, mean_profile_size=args.profile_size,
                          rating_range=tuple(args.range), seed=args.seed)
    except ValueError as e:
        raise ConfigError([str(e)]) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = generate(cfg)
    write_dataset(ds, out / "ratings.tsv", out / "genres.tsv")
    print(f"wrote {ds.n_ratings} ratings for {ds.n_users} users and {ds.n_items} items to {out}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "stats": _cmd_stats, "synth": _cmd_synth}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        for problem in e.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as e:
        code = EXIT_INPUT if isinstance(e.cause, (OSError, DatasetError)) else EXIT_RUNTIME
        print(f"error: {e}", file=sys.stderr)
        return code
    except (OSError, DatasetError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
