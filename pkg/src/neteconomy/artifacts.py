"""Run artefacts on disk: CSV series, JSON summaries and snapshots, graph export.

Floats are written with ``repr`` so that re-reading a CSV gives back the
exact in-memory values.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, fields
from pathlib import Path

import networkx as nx

from .core import ConsumerState, EconomyState, ProducerState
from .metrics import PeriodRecord, PriceRow
from .runner import RunResult

log = logging.getLogger(__name__)

TIMESERIES = "timeseries.csv"
PRICES = "prices.csv"
SUMMARY = "summary.json"
SNAPSHOT_DIR = "snapshots"

# row order of the summary table
OUTCOME_ORDER = ["Equilibrium", "Disequilibrium", "ConsumerWealthZero", "SingleProducerLeft"]
SUMMARY_COLUMNS = [
    "total_producer_wealth",
    "total_consumer_wealth",
    "shut_firms",
    "gini_producers",
    "gini_consumers",
    "total_utility",
    "wage",
    "leisure_proportion",
]

_INT_COLUMNS = {"period", "producer_id", "live_producers", "shut_firms"}


# --------------------------------------------------------------------------
# Snapshots
# --------------------------------------------------------------------------


def _int_keys(d: dict) -> dict:
    return {int(k): v for k, v in d.items()}


def state_to_dict(state: EconomyState) -> dict:
    return {
        "period": state.period,
        "wage": state.wage,
        "wage_adjust": state.wage_adjust,
        "halted": state.halted,
        "initial_consumer_wealth": state.initial_consumer_wealth,
        "producers": [asdict(p) for p in state.producers.values()],
        "removed": [asdict(p) for p in state.removed.values()],
        "consumers": [asdict(c) for c in state.consumers.values()],
    }


def _producer(d: dict) -> ProducerState:
    d = dict(d, input_elasticities=_int_keys(d["input_elasticities"]), shares=_int_keys(d["shares"]))
    return ProducerState(**d)


def state_from_dict(d: dict) -> EconomyState:
    return EconomyState(
        period=d["period"],
        producers={p["id"]: _producer(p) for p in d["producers"]},
        consumers={
            c["id"]: ConsumerState(**dict(c, good_elasticities=_int_keys(c["good_elasticities"])))
            for c in d["consumers"]
        },
        wage=d["wage"],
        wage_adjust=d["wage_adjust"],
        halted=d["halted"],
        removed={p["id"]: _producer(p) for p in d["removed"]},
        initial_consumer_wealth=d["initial_consumer_wealth"],
    )


def snapshot_path(run_dir, period: int) -> Path:
    return Path(run_dir) / SNAPSHOT_DIR / f"t{period:04d}.json"


def load_snapshot(run_dir, period: int) -> EconomyState:
    path = snapshot_path(run_dir, period)
    if not path.exists():
        raise FileNotFoundError(f"no snapshot for period {period} in {run_dir}")
    return state_from_dict(json.loads(path.read_text()))


# --------------------------------------------------------------------------
# CSV series
# --------------------------------------------------------------------------


def write_rows(path, rows, columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(row, c) for c in columns)])


def _parse(column: str, text: str):
    return int(text) if column in _INT_COLUMNS else float(text)


def read_rows(path, cls):
    columns = [f.name for f in fields(cls)]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != columns:
            raise ValueError(f"{path}: unexpected header {header}")
        return [cls(**{c: _parse(c, v) for c, v in zip(columns, line)}) for line in reader]


def read_timeseries(path) -> list[PeriodRecord]:
    return read_rows(path, PeriodRecord)


def read_prices(path) -> list[PriceRow]:
    return read_rows(path, PriceRow)


# --------------------------------------------------------------------------
# Whole run
# --------------------------------------------------------------------------


def run_summary(result: RunResult) -> dict:
    final = max(result.snapshots) if result.snapshots else None
    summary = result.outcome.as_dict()
    summary["config"] = result.config.to_dict()
    summary["snapshot_periods"] = sorted(result.snapshots)
    if final is not None:
        state = result.snapshots[final]
        summary["producer_wealth"] = {str(y): p.wealth for y, p in state.producers.items()}
        summary["consumer_wealth"] = {str(j): c.wealth for j, c in state.consumers.items()}
    return summary


def write_run(result: RunResult, out_dir) -> Path:
    """Write ``timeseries.csv``, ``prices.csv``, ``summary.json`` and snapshots."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_rows(out / TIMESERIES, result.records, PeriodRecord.columns())
    write_rows(out / PRICES, result.prices, PriceRow.columns())
    for t, state in result.snapshots.items():
        path = snapshot_path(out, t)
        path.parent.mkdir(exist_ok=True)
        path.write_text(json.dumps(state_to_dict(state), sort_keys=True))
    (out / SUMMARY).write_text(json.dumps(run_summary(result), indent=2, sort_keys=True) + "\n")
    return out


# --------------------------------------------------------------------------
# Graph export
# --------------------------------------------------------------------------


def economy_graph(state: EconomyState) -> nx.DiGraph:
    """Live agents as nodes; one edge per trade link, pointing seller to buyer."""
    g = nx.DiGraph(period=state.period)
    for y, p in state.producers.items():
        g.add_node(y, role="producer", wealth=p.wealth, price=p.price)
    for j, c in state.consumers.items():
        g.add_node(j, role="consumer", wealth=c.wealth)
    for seller, buyer in sorted(state.graph):
        g.add_edge(seller, buyer)
    return g


def export_graph(run_dir, period: int, out_path=None) -> Path:
    """Write the snapshot at ``period`` as GraphML."""
    state = load_snapshot(run_dir, period)
    path = Path(out_path) if out_path else Path(run_dir) / f"graph_t{period:04d}.graphml"
    nx.write_graphml(economy_graph(state), path)
    return path


# --------------------------------------------------------------------------
# Sweep summaries
# --------------------------------------------------------------------------


def read_runs(path) -> tuple[list[dict], int]:
    """Parsed run lines and the number of malformed lines skipped."""
    runs, bad = [], 0
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                if not isinstance(row, dict) or "outcome" not in row:
                    raise ValueError("missing outcome")
            except ValueError:
                bad += 1
                continue
            runs.append(row)
    if bad:
        log.warning("skipped %d malformed line(s) in %s", bad, path)
    return runs, bad


def summarize_runs(runs: list[dict]) -> list[dict]:
    """One row per outcome label: run count and the mean of each final aggregate."""
    labels = OUTCOME_ORDER + sorted({r["outcome"] for r in runs} - set(OUTCOME_ORDER))
    table = []
    for label in labels:
        group = [r for r in runs if r["outcome"] == label]
        row = {"outcome": label, "count": len(group)}
        for col in SUMMARY_COLUMNS:
            vals = [r[col] for r in group if col in r]
            row[col] = math.fsum(vals) / len(vals) if vals else math.nan
        table.append(row)
    return table


def write_summary_csv(table: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, ["outcome", "count"] + SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in table:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def format_summary(table: list[dict]) -> str:
    heads = ["outcome", "count"] + SUMMARY_COLUMNS
    cells = [[row["outcome"], str(row["count"])] + [f"{row[c]:.4g}" for c in SUMMARY_COLUMNS] for row in table]
    widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(heads)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(heads, widths))]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)
