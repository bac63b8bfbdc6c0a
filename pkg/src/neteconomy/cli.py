"""Command-line front end: ``run``, ``sweep``, ``summarize``, ``export-graph``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import artifacts
from .runner import seed_grid, simulate, sweep
from .scenario import ConfigInvalid, ScenarioConfig

RUNS_FILE = "runs.jsonl"


def _seed_range(text: str) -> range:
    """``A:B`` is the half-open range ``A..B-1``."""
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None
    if b <= a:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return range(a, b)


def _load_config(path) -> ScenarioConfig:
    config = ScenarioConfig.from_json(path) if path else ScenarioConfig()
    config.validate()
    return config


def cmd_run(args) -> int:
    config = _load_config(args.config)
    result = simulate(config, args.s1, args.s2)
    out = artifacts.write_run(result, args.out)
    print(f"({args.s1}, {args.s2}) {result.outcome.outcome} after {result.outcome.periods} periods -> {out}")
    return 0


def cmd_sweep(args) -> int:
    if args.jobs < 1:
        raise ValueError("--jobs must be at least 1")
    config = _load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = sweep(seed_grid(args.s1_range, args.s2_range), config, args.jobs, out / RUNS_FILE)
    failed = sum(r["outcome"] == "RunFailed" for r in results)
    print(f"{len(results)} runs ({failed} failed) -> {out / RUNS_FILE}")
    return 0


def cmd_summarize(args) -> int:
    runs, bad = artifacts.read_runs(args.runs)
    table = artifacts.summarize_runs(runs)
    print(artifacts.format_summary(table))
    if bad:
        print(f"skipped {bad} malformed line(s)", file=sys.stderr)
    if args.out:
        artifacts.write_summary_csv(table, args.out)
    return 0


def cmd_export_graph(args) -> int:
    path = artifacts.export_graph(args.run_dir, args.period, args.out)
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neteconomy", description="Network economy simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one seed pair")
    p.add_argument("--s1", type=int, required=True)
    p.add_argument("--s2", type=int, required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="simulate a grid of seed pairs")
    p.add_argument("--s1-range", type=_seed_range, required=True, metavar="A:B")
    p.add_argument("--s2-range", type=_seed_range, required=True, metavar="A:B")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("summarize", help="tabulate outcomes of a sweep")
    p.add_argument("runs", help="runs.jsonl")
    p.add_argument("--out", help="also write the table as CSV")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("export-graph", help="write a snapshot's network as GraphML")
    p.add_argument("run_dir")
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--out", help="graph file (default: <run_dir>/graph_tNNNN.graphml)")
    p.set_defaults(func=cmd_export_graph)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
