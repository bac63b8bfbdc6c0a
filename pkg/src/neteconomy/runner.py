"""Whole runs: simulate to the horizon or a halt, classify, and sweep seed grids."""

from __future__ import annotations

import copy
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import EconomyState, derive_streams, validate_economy
from .equilibrium import classify_run
from .market import PeriodLedger, run_period
from .metrics import PeriodRecord, PriceRow, period_record, price_rows
from .scenario import ScenarioConfig, initial_state

log = logging.getLogger(__name__)

PER_PERIOD_MONEY_TOL = 1e-9
RUN_MONEY_TOL = 1e-6
RUN_FAILED = "RunFailed"


@dataclass
class RunOutcome:
    s1: int
    s2: int
    outcome: str
    periods: int
    total_producer_wealth: float
    total_consumer_wealth: float
    shut_firms: int
    live_producers: int
    gini_consumers: float
    gini_producers: float
    total_utility: float
    wage: float
    leisure_proportion: float
    excess_labour_demand: float
    initial_gini_consumers: float
    invariant_violations: int
    first_violation: str | None
    config_hash: str

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunResult:
    config: ScenarioConfig
    outcome: RunOutcome
    records: list[PeriodRecord]
    prices: list[PriceRow]
    snapshots: dict[int, EconomyState] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)


class InvariantMonitor:
    """Per-period checks beyond the static type invariants.

    Money conservation (step-to-step and against the start), rationing
    bounds, monotone adjustment factors, and finite records.
    """

    def __init__(self, state: EconomyState):
        self.initial_total = state.total_wealth()
        self.prev_total = self.initial_total
        self.prev_wage_adjust = state.wage_adjust
        self.prev_sigma = {y: p.price_adjust for y, p in state.producers.items()}
        self.violations: list[str] = []
        self._report(state.period, validate_economy(state))

    def _report(self, t, problems):
        self.violations.extend(f"t={t}: {msg}" for msg in problems)

    def check(self, state: EconomyState, ledger: PeriodLedger, record: PeriodRecord) -> None:
        problems = validate_economy(state)
        scale = self.initial_total

        total = state.total_wealth()
        if abs(total - self.prev_total) > PER_PERIOD_MONEY_TOL * scale:
            problems.append(f"money not conserved this period: {self.prev_total!r} -> {total!r}")
        if abs(total - self.initial_total) > RUN_MONEY_TOL * scale:
            problems.append(f"money drifted from {self.initial_total!r} to {total!r}")
        self.prev_total = total

        # delivered <= ordered at the posted price also bounds every charge
        # by the buyer's own (budget-feasible) order cost
        d = ledger.demands
        if np.any(ledger.delivered > d.orders):
            over = sorted(set(d.edges.seller[ledger.delivered > d.orders].tolist()))
            problems.append(f"producers {over} delivered more than was ordered")
        for y in d.market_demand:
            if d.market_demand[y] > ledger.supply[y]:
                got = math.fsum(ledger.delivered[d.edges.seller == y])
                if got > ledger.supply[y]:
                    problems.append(f"producer {y} delivered more than its inventory")
        for y, h in ledger.labour_hired.items():
            if h > ledger.demands.labour_demand[y]:
                problems.append(f"producer {y} hired more labour than demanded")
        for j, s in ledger.labour_sold.items():
            if s > ledger.demands.labour_supply[j]:
                problems.append(f"consumer {j} sold more labour than offered")

        if state.wage_adjust > self.prev_wage_adjust:
            problems.append("wage adjustment factor increased")
        self.prev_wage_adjust = state.wage_adjust
        for y, p in state.producers.items():
            if p.price_adjust > self.prev_sigma.get(y, math.inf):
                problems.append(f"producer {y} price adjustment factor increased")
        self.prev_sigma = {y: p.price_adjust for y, p in state.producers.items()}

        if not record.is_finite():
            problems.append("period record has non-finite values")
        self._report(state.period, problems)


def simulate(config: ScenarioConfig, s1: int, s2: int, *, check_invariants: bool = True, snapshots: bool = True) -> RunResult:
    """Run one economy from its seeds to the horizon or a termination condition.

    Full-state snapshots are kept at t=0 and at the final period only.
    """
    config.validate()
    streams = derive_streams(s1, s2)
    state = initial_state(config, streams)
    monitor = InvariantMonitor(state) if check_invariants else None

    records = [period_record(state)]
    prices = price_rows(state)
    kept = {0: copy.deepcopy(state)} if snapshots else {}
    price_history: dict[int, list[float]] = {y: [] for y in state.producers}
    wage_history: list[float] = []

    while state.period < config.horizon and not state.halted:
        ledger = run_period(state, streams)
        record = period_record(state, ledger)
        records.append(record)
        rows = price_rows(state)
        prices.extend(rows)
        for row in rows:
            price_history[row.producer_id].append(row.price)
        wage_history.append(state.wage)
        if monitor:
            monitor.check(state, ledger, record)

    if snapshots:
        kept[state.period] = copy.deepcopy(state)

    label = classify_run(
        {y: price_history[y] for y in state.producers},
        wage_history,
        termination=state.halted,
        tolerance=config.equilibrium_tolerance,
        window=config.rolling_window,
        scan_window=range(config.scan_start, config.scan_stop),
    )
    violations = monitor.violations if monitor else []
    final = records[-1]
    outcome = RunOutcome(
        s1=int(s1),
        s2=int(s2),
        outcome=label,
        periods=state.period,
        total_producer_wealth=final.total_producer_wealth,
        total_consumer_wealth=final.total_consumer_wealth,
        shut_firms=final.shut_firms,
        live_producers=final.live_producers,
        gini_consumers=final.gini_consumers,
        gini_producers=final.gini_producers,
        total_utility=final.total_utility,
        wage=final.wage,
        leisure_proportion=final.leisure_proportion,
        excess_labour_demand=final.excess_labour_demand,
        initial_gini_consumers=records[0].gini_consumers,
        invariant_violations=len(violations),
        first_violation=violations[0] if violations else None,
        config_hash=config.digest(),
    )
    return RunResult(config, outcome, records, prices, kept, violations)


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------


def _run_pair(job) -> dict:
    config_dict, s1, s2 = job
    try:
        config = ScenarioConfig.from_dict(config_dict)
        return simulate(config, s1, s2, snapshots=False).outcome.as_dict()
    except Exception as exc:  # one bad run must not stop the sweep
        return {"s1": s1, "s2": s2, "outcome": RUN_FAILED, "error": f"{type(exc).__name__}: {exc}"}


def seed_grid(s1_range: range, s2_range: range) -> list[tuple[int, int]]:
    return sorted((a, b) for a in s1_range for b in s2_range)


def sweep(pairs, config: ScenarioConfig, jobs: int, out_path) -> list[dict]:
    """Run every seed pair and write one JSON line per run to ``out_path``.

    Lines are written in sorted seed order as results arrive, each flushed
    whole, so the file content does not depend on ``jobs`` and an
    interrupted sweep leaves only complete lines behind.
    """
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    config.validate()
    pairs = sorted(pairs)
    work = [(config.to_dict(), s1, s2) for s1, s2 in pairs]
    results = []
    with open(out_path, "w") as fh:
        if jobs == 1:
            stream = map(_run_pair, work)
            pool = None
        else:
            pool = ProcessPoolExecutor(max_workers=jobs)
            stream = pool.map(_run_pair, work, chunksize=1)
        try:
            for line in stream:
                fh.write(json.dumps(line, sort_keys=True) + "\n")
                fh.flush()
                results.append(line)
                if line.get("outcome") == RUN_FAILED:
                    log.warning("run (%s, %s) failed: %s", line["s1"], line["s2"], line["error"])
        finally:
            if pool is not None:
                pool.shutdown(cancel_futures=True)
    return results
