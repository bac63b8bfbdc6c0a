"""Per-period aggregates: wealth, inequality, utility, leisure, labour gap."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import EconomyState


class UndefinedForZeroTotal(ValueError):
    """Gini of a vector whose values sum to zero."""


def gini(values) -> float:
    """Mean-absolute-difference Gini coefficient of non-negative values.

    ``G = sum_ij |x_i - x_j| / (2 n^2 mean)``, computed from the sorted
    values in O(n log n).

    Raises
    ------
    UndefinedForZeroTotal
        If the values sum to zero.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("gini of an empty vector")
    total = x.sum()
    if total <= 0:
        raise UndefinedForZeroTotal("values sum to zero")
    ranks = np.arange(1, n + 1)
    g = float(np.dot(2 * ranks - n - 1, x) / (n * total))
    return min(max(g, 0.0), 1.0)


def gini_or_zero(values) -> tuple[float, bool]:
    """``(gini, defined)``; an all-zero vector reports 0 with ``defined=False``."""
    try:
        return gini(values), True
    except UndefinedForZeroTotal:
        return 0.0, False


def leisure_proportion(time_budgets, labour_sold) -> float:
    """Percent of the aggregate time endowment not worked."""
    T = math.fsum(time_budgets)
    worked = math.fsum(labour_sold)
    return 100.0 * (T - worked) / T


def total_utility(consumers) -> float:
    """Sum of realised utilities; ``inf`` if the sum leaves the float range."""
    try:
        return math.fsum(c.last_utility for c in consumers)
    except OverflowError:
        return math.inf


def excess_labour(ledger) -> float:
    return ledger.labour_demand_total - ledger.labour_supply_total


@dataclass
class PeriodRecord:
    period: int
    wage: float
    wage_adjust: float
    total_producer_wealth: float
    total_consumer_wealth: float
    gini_producers: float
    gini_consumers: float
    total_utility: float
    leisure_proportion: float
    excess_labour_demand: float
    labour_demand: float
    labour_supply: float
    live_producers: int
    shut_firms: int

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in asdict(self).values())


@dataclass
class PriceRow:
    period: int
    producer_id: int
    price: float
    inventory: float
    demand: float
    price_adjust: float

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def period_record(state: EconomyState, ledger=None) -> PeriodRecord:
    """Aggregate the state at the end of a period.

    With ``ledger=None`` (the initial state) nothing has been traded, so the
    labour gap is zero and leisure comes from the consumers' last labour.
    """
    producer_wealth = [p.wealth for p in state.producers.values()]
    producer_wealth += [p.wealth for p in state.removed.values()]
    consumers = list(state.consumers.values())
    consumer_wealth = [c.wealth for c in consumers]
    g_p, _ = gini_or_zero(np.clip(producer_wealth, 0.0, None))
    g_c, _ = gini_or_zero(np.clip(consumer_wealth, 0.0, None))
    if ledger is None:
        Ld = Ls = 0.0
    else:
        Ld, Ls = ledger.labour_demand_total, ledger.labour_supply_total
    return PeriodRecord(
        period=state.period,
        wage=state.wage,
        wage_adjust=state.wage_adjust,
        total_producer_wealth=math.fsum(producer_wealth),
        total_consumer_wealth=math.fsum(consumer_wealth),
        gini_producers=g_p,
        gini_consumers=g_c,
        total_utility=total_utility(consumers),
        leisure_proportion=leisure_proportion(
            [c.time_budget for c in consumers], [c.last_labour_sold for c in consumers]
        ),
        excess_labour_demand=Ld - Ls,
        labour_demand=Ld,
        labour_supply=Ls,
        live_producers=len(state.producers),
        shut_firms=len(state.removed),
    )


def price_rows(state: EconomyState) -> list[PriceRow]:
    return [
        PriceRow(state.period, y, p.price, p.inventory, p.last_demand, p.price_adjust)
        for y, p in state.producers.items()
    ]
