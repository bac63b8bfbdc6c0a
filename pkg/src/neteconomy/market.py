"""One period of trade, production and adjustment.

A period runs in a fixed order: agents form demands at current prices,
firms sell from inventory (rationing proportionally when short), labour is
traded economy-wide at one wage, firms produce into inventory, prices and
the wage move toward excess demand, profits are paid out, consumers settle
their wealth, and finally the network is repaired around firms that ran out
of stock.

All money moves as explicit payments (price times quantity actually
delivered, wage times labour actually hired), so total wealth across
consumers and all producers, including shut ones, is conserved.

Within a period the trade network is flattened into edge arrays (seller,
buyer, elasticity) and per-agent totals are formed with ``np.bincount``;
arrays indexed by agent id have one slot per id ever issued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ConsumerState, EconomyState, ProducerState, SeedStreams, open_unit
from .optimizer import ProducerProblem, consumer_utility, optimal_labour_supply, producer_choose_inputs

REMOVAL_THRESHOLD = 1e-12
CONSUMER_WEALTH_ZERO = 1e-9
DECAY = 0.9

CONSUMER_WEALTH_ZERO_LABEL = "ConsumerWealthZero"
SINGLE_PRODUCER_LEFT = "SingleProducerLeft"
PRODUCERS_EXHAUSTED = "ProducersExhausted"

_FLOAT_MAX = float(np.finfo(float).max)
_LOG_FLOAT_MAX = math.log(_FLOAT_MAX)


class Halted(RuntimeError):
    def __init__(self, label: str):
        super().__init__(f"economy halted: {label}")
        self.label = label


@dataclass
class Edges:
    """The trade network flattened for one period.

    Producer-bought edges come first (``n_producer_edges`` of them), grouped
    by buyer; consumer-bought edges follow.
    """

    seller: np.ndarray
    buyer: np.ndarray
    elasticity: np.ndarray
    n_producer_edges: int
    n_ids: int

    @classmethod
    def from_state(cls, state: EconomyState) -> Edges:
        sellers, buyers, alphas = [], [], []
        for p in state.producers.values():
            sellers.extend(p.input_elasticities)
            alphas.extend(p.input_elasticities.values())
            buyers.extend([p.id] * len(p.input_elasticities))
        n_pe = len(sellers)
        for c in state.consumers.values():
            sellers.extend(c.good_elasticities)
            alphas.extend(c.good_elasticities.values())
            buyers.extend([c.id] * len(c.good_elasticities))
        return cls(
            seller=np.array(sellers, dtype=np.intp),
            buyer=np.array(buyers, dtype=np.intp),
            elasticity=np.array(alphas, dtype=float),
            n_producer_edges=n_pe,
            n_ids=_n_ids(state),
        )

    def total_by_seller(self, values) -> np.ndarray:
        return np.bincount(self.seller, weights=values, minlength=self.n_ids)

    def total_by_buyer(self, values) -> np.ndarray:
        return np.bincount(self.buyer, weights=values, minlength=self.n_ids)


def _n_ids(state: EconomyState) -> int:
    ids = list(state.consumers) + list(state.producers) + list(state.removed)
    return max(ids) + 1 if ids else 0


def _pairs_to_nested(first, second, values) -> dict[int, dict[int, float]]:
    out: dict[int, dict[int, float]] = {}
    for a, b, v in zip(first.tolist(), second.tolist(), values.tolist()):
        out.setdefault(a, {})[b] = v
    return out


@dataclass
class Demands:
    edges: Edges
    orders: np.ndarray  # one quantity per edge
    market_demand: dict[int, float]
    labour_demand: dict[int, float]  # producer -> labour
    labour_supply: dict[int, float]  # consumer -> labour offered

    def order_book(self) -> dict[int, dict[int, float]]:
        """``seller -> buyer -> quantity``."""
        book = {y: {} for y in self.market_demand}
        book.update(_pairs_to_nested(self.edges.seller, self.edges.buyer, self.orders))
        return book


@dataclass
class PeriodLedger:
    demands: Demands
    wage: float
    prices: dict[int, float]
    supply: dict[int, float] = field(default_factory=dict)
    delivered: np.ndarray | None = None  # one quantity per edge
    revenue: dict[int, float] = field(default_factory=dict)
    goods_cost: dict[int, float] = field(default_factory=dict)  # producers' input spending
    goods_spending: dict[int, float] = field(default_factory=dict)  # consumers
    labour_hired: dict[int, float] = field(default_factory=dict)
    labour_sold: dict[int, float] = field(default_factory=dict)
    produced: dict[int, float] = field(default_factory=dict)
    cost: dict[int, float] = field(default_factory=dict)
    profit: dict[int, float] = field(default_factory=dict)
    profit_income: dict[int, float] = field(default_factory=dict)
    utility: dict[int, float] = field(default_factory=dict)
    labour_demand_total: float = 0.0
    labour_supply_total: float = 0.0
    labour_traded: float = 0.0
    removed: list[int] = field(default_factory=list)

    @property
    def excess_labour(self) -> float:
        return self.labour_demand_total - self.labour_supply_total

    @property
    def deliveries(self) -> dict[int, dict[int, float]]:
        """``seller -> buyer -> delivered quantity``."""
        e = self.demands.edges
        return _pairs_to_nested(e.seller, e.buyer, self.delivered)

    @property
    def received(self) -> dict[int, dict[int, float]]:
        """``buyer -> seller -> delivered quantity``."""
        e = self.demands.edges
        return _pairs_to_nested(e.buyer, e.seller, self.delivered)


# --------------------------------------------------------------------------
# Demand formation
# --------------------------------------------------------------------------


def _producer_orders(p: ProducerState, state: EconomyState) -> tuple[np.ndarray, float]:
    prices = [state.producers[s].price for s in p.input_elasticities] + [state.wage]
    elasticities = list(p.input_elasticities.values()) + [p.labour_elasticity]
    problem = ProducerProblem(p.price, p.tech_A, prices, elasticities, p.wealth)
    x = producer_choose_inputs(problem).quantities
    return x[:-1], float(x[-1])


def collect_demands(state: EconomyState) -> Demands:
    """Every agent's optimal orders at current prices, wage and wealth.

    Producers solve their profit problem with wealth as budget; consumers
    spend the goods share of their wealth and offer labour expecting last
    period's profit income again.
    """
    edges = Edges.from_state(state)
    orders = np.zeros(edges.seller.size)
    labour_demand = {}
    k = 0
    for p in state.producers.values():
        qty, labour = _producer_orders(p, state)
        orders[k:k + qty.size] = qty
        k += qty.size
        labour_demand[p.id] = labour

    price = np.ones(edges.n_ids)
    for y, p in state.producers.items():
        price[y] = p.price
    consumers = list(state.consumers.values())
    scale = np.zeros(edges.n_ids)
    for c in consumers:
        if c.wealth > 0:
            scale[c.id] = c.wealth / c.elasticity_total()
    ce = slice(k, None)
    orders[ce] = edges.elasticity[ce] * scale[edges.buyer[ce]] / price[edges.seller[ce]]

    supply = optimal_labour_supply(
        np.array([c.income_elasticity for c in consumers]),
        np.array([c.leisure_elasticity for c in consumers]),
        state.wage,
        np.array([c.time_budget for c in consumers]),
        np.array([c.last_profit_income for c in consumers]),
    )
    labour_supply = dict(zip(state.consumers, np.atleast_1d(supply).tolist()))

    totals = edges.total_by_seller(orders)
    market_demand = {y: float(totals[y]) for y in state.producers}
    return Demands(edges, orders, market_demand, labour_demand, labour_supply)


# --------------------------------------------------------------------------
# Goods and labour trade
# --------------------------------------------------------------------------


def ration_goods(supply: float, demands) -> np.ndarray:
    """Deliveries under proportional rationing.

    When short, the scale factor is nudged down by ulps until the delivered
    total does not exceed ``supply`` in exact arithmetic.
    """
    d = np.asarray(demands, dtype=float)
    total = math.fsum(d)
    if total <= supply:
        return d.copy()
    factor = supply / total
    out = d * factor
    while math.fsum(out) > supply:
        factor = math.nextafter(factor, 0.0)
        out = d * factor
    return out


def trade_goods(state: EconomyState, ledger: PeriodLedger) -> PeriodLedger:
    """Sell from inventory; buyers pay the posted price for what they receive."""
    d = ledger.demands
    edges = d.edges
    delivered = d.orders.copy()
    for y, p in state.producers.items():
        ledger.supply[y] = p.inventory
        if d.market_demand[y] > p.inventory:
            idx = np.flatnonzero(edges.seller == y)
            delivered[idx] = ration_goods(p.inventory, d.orders[idx])
    ledger.delivered = delivered

    price = np.zeros(edges.n_ids)
    for y, pr in ledger.prices.items():
        price[y] = pr
    payment = delivered * price[edges.seller]
    revenue = edges.total_by_seller(payment)
    spent = edges.total_by_buyer(payment)
    ledger.revenue = {y: float(revenue[y]) for y in state.producers}
    ledger.goods_cost = {y: float(spent[y]) for y in state.producers}
    ledger.goods_spending = {j: float(spent[j]) for j in state.consumers}
    return ledger


def allocate_labour(labour_demand: dict[int, float], labour_supply: dict[int, float]):
    """Short side served in full, long side scaled down proportionally.

    Returns ``(hired, sold, total_demand, total_supply, traded)``.
    """
    Ld = math.fsum(labour_demand.values())
    Ls = math.fsum(labour_supply.values())
    if Ld <= Ls:
        hired = dict(labour_demand)
        factor = Ld / Ls if Ls > 0 else 0.0
        sold = {j: min(s * factor, s) for j, s in labour_supply.items()}
    else:
        sold = dict(labour_supply)
        factor = Ls / Ld
        hired = {y: min(d * factor, d) for y, d in labour_demand.items()}
    return hired, sold, Ld, Ls, min(Ld, Ls)


def clear_labour_market(state: EconomyState, ledger: PeriodLedger) -> PeriodLedger:
    if state.wage <= 0:
        raise ValueError("wage must be positive")
    d = ledger.demands
    hired, sold, Ld, Ls, traded = allocate_labour(d.labour_demand, d.labour_supply)
    ledger.labour_hired = hired
    ledger.labour_sold = sold
    ledger.labour_demand_total = Ld
    ledger.labour_supply_total = Ls
    ledger.labour_traded = traded
    return ledger


# --------------------------------------------------------------------------
# Production
# --------------------------------------------------------------------------


def _log_input_index(edges: Edges, delivered: np.ndarray, part: slice):
    """Per-buyer ``sum(alpha * log q)`` over ``part`` of the edges, plus a
    flag marking buyers that received nothing on some edge."""
    q = delivered[part]
    b = edges.buyer[part]
    empty = np.bincount(b, weights=(q <= 0), minlength=edges.n_ids) > 0
    with np.errstate(divide="ignore"):
        logs = edges.elasticity[part] * np.log(np.where(q > 0, q, 1.0))
    return np.bincount(b, weights=logs, minlength=edges.n_ids), empty


def production(tech: float, labour: float, labour_elasticity: float, inputs: dict, elasticities: dict) -> float:
    """Cobb-Douglas output; zero when labour or any input is zero."""
    if labour <= 0:
        return 0.0
    log_q = math.log(tech) + labour_elasticity * math.log(labour)
    for s, a in elasticities.items():
        q = inputs.get(s, 0.0)
        if q <= 0:
            return 0.0
        log_q += a * math.log(q)
    return math.exp(min(log_q, _LOG_FLOAT_MAX))


def produce_and_update_inventory(state: EconomyState, ledger: PeriodLedger) -> EconomyState:
    """Produce from delivered inputs and hired labour; restock; mark empty firms."""
    edges = ledger.demands.edges
    log_inputs, starved = _log_input_index(edges, ledger.delivered, slice(0, edges.n_producer_edges))
    w = ledger.wage
    for y, p in state.producers.items():
        labour = ledger.labour_hired.get(y, 0.0)
        if labour <= 0 or starved[y]:
            q = 0.0
        else:
            log_q = math.log(p.tech_A) + p.labour_elasticity * math.log(labour) + log_inputs[y]
            q = math.exp(min(log_q, _LOG_FLOAT_MAX))
        ledger.produced[y] = q
        ledger.cost[y] = ledger.goods_cost[y] + w * labour
        ledger.profit[y] = ledger.revenue[y] - ledger.cost[y]
        demand = ledger.demands.market_demand[y]
        # stocks saturate rather than overflow once prices have collapsed
        p.inventory = min(p.inventory - min(p.inventory, demand) + q, _FLOAT_MAX)
        p.last_demand = demand
        if p.inventory <= REMOVAL_THRESHOLD:
            p.marked_for_removal = True
    return state


# --------------------------------------------------------------------------
# Price and wage adjustment
# --------------------------------------------------------------------------


def adjust_price(price: float, sigma: float, excess: float) -> tuple[float, float]:
    """Move ``price`` by ``sigma * excess``; shrink ``sigma`` by 10% while that is non-positive."""
    if not math.isfinite(excess):
        raise ValueError(f"excess demand is not finite: {excess!r}")
    candidate = price + sigma * excess
    while candidate <= 0:
        shrunk = DECAY * sigma
        if shrunk == sigma:
            # sigma is stuck at the bottom of the subnormal range; the step
            # it stands for is below resolution, so the price stays put
            return price, sigma
        sigma = shrunk
        candidate = price + sigma * excess
    return candidate, sigma


def adjust_prices(state: EconomyState, ledger: PeriodLedger) -> EconomyState:
    """Each firm compares this period's demand with next period's stock."""
    for y, p in state.producers.items():
        excess = ledger.demands.market_demand[y] - p.inventory
        excess = min(max(excess, -_FLOAT_MAX), _FLOAT_MAX)
        p.price, p.price_adjust = adjust_price(p.price, p.price_adjust, excess)
    return state


def adjust_wage(state: EconomyState, excess_labour: float) -> EconomyState:
    state.wage, state.wage_adjust = adjust_price(state.wage, state.wage_adjust, excess_labour)
    return state


# --------------------------------------------------------------------------
# Settlement
# --------------------------------------------------------------------------


def distribute_profits(state: EconomyState, ledger: PeriodLedger) -> EconomyState:
    """Firms keep ``PRR`` of a positive profit and pay the rest to shareholders.

    Shutting firms pay out everything.  Losses stay with the firm.
    """
    n = ledger.demands.edges.n_ids
    income = np.zeros(n)
    for y, p in state.producers.items():
        profit = ledger.profit[y]
        if profit > 0:
            prr = 0.0 if p.marked_for_removal else p.prr
            holders = np.fromiter(p.shares.keys(), dtype=np.intp, count=len(p.shares))
            paid = np.fromiter(p.shares.values(), dtype=float, count=len(p.shares)) * ((1.0 - prr) * profit)
            np.add.at(income, holders, paid)
            p.wealth += profit - math.fsum(paid)
        else:
            p.wealth += profit
    ledger.profit_income = {j: float(income[j]) for j in state.consumers}
    return state


def settle_consumer_wealth(state: EconomyState, ledger: PeriodLedger) -> EconomyState:
    """Pay for goods, collect wages and dividends, and score realised utility."""
    edges = ledger.demands.edges
    log_goods, starved = _log_input_index(edges, ledger.delivered, slice(edges.n_producer_edges, None))
    w = ledger.wage
    for j, c in state.consumers.items():
        sold = ledger.labour_sold.get(j, 0.0)
        v = ledger.profit_income.get(j, 0.0)
        c.wealth = c.wealth - ledger.goods_spending.get(j, 0.0) + w * sold + v
        income = w * sold + v
        leisure = c.time_budget - sold
        if starved[j] or income <= 0 or leisure <= 0 or not c.good_elasticities:
            u = 0.0
        else:
            log_u = c.income_elasticity * math.log(income) + c.leisure_elasticity * math.log(leisure) + log_goods[j]
            u = math.inf if log_u > _LOG_FLOAT_MAX else math.exp(log_u)
        ledger.utility[j] = u
        c.last_utility = u
        c.last_labour_sold = sold
        c.last_profit_income = v
    return state


def realized_utility(c: ConsumerState, ledger: PeriodLedger) -> float:
    """Utility of what ``c`` actually received this period (reference path)."""
    got = ledger.received.get(c.id, {})
    return consumer_utility(
        [got.get(s, 0.0) for s in c.good_elasticities],
        list(c.good_elasticities.values()),
        c.income_elasticity,
        c.leisure_elasticity,
        ledger.wage,
        ledger.labour_sold.get(c.id, 0.0),
        ledger.profit_income.get(c.id, 0.0),
        c.time_budget,
    )


# --------------------------------------------------------------------------
# Network repair
# --------------------------------------------------------------------------


def _renormalize(elasticities: dict[int, float], extra: list[float], target: float) -> list[float]:
    total = math.fsum(elasticities.values()) + math.fsum(extra)
    factor = target / total
    for k in elasticities:
        elasticities[k] *= factor
    return [e * factor for e in extra]


def _rewire_one(agent, dropped: int, live: list[int], coin, pick) -> None:
    if isinstance(agent, ProducerState):
        elasticities = agent.input_elasticities
        target = agent.kappa
    else:
        elasticities = agent.good_elasticities
        target = agent.elasticity_total()
    del elasticities[dropped]
    candidates = [y for y in live if y not in elasticities and y != agent.id]
    if candidates and coin.random() < 0.5:
        new = candidates[int(pick.integers(len(candidates)))]
        elasticities[new] = open_unit(pick)

    if isinstance(agent, ProducerState):
        (agent.labour_elasticity,) = _renormalize(elasticities, [agent.labour_elasticity], target)
    else:
        agent.income_elasticity, agent.leisure_elasticity = _renormalize(
            elasticities, [agent.income_elasticity, agent.leisure_elasticity], target
        )


def rewire_demanders(state: EconomyState, streams: SeedStreams) -> EconomyState:
    """Each demander of a shutting firm drops it or, on a fair coin, replaces it.

    Replacements are drawn uniformly from live firms the demander does not
    already buy from and enter with a fresh Uniform(0, 1) elasticity; the
    demander's elasticities (labour/income/leisure included) are then
    rescaled to their previous total.  Without candidates the edge is simply
    dropped and no coin is drawn.
    """
    marked = [y for y, p in state.producers.items() if p.marked_for_removal]
    if not marked:
        return state
    live = [y for y, p in state.producers.items() if not p.marked_for_removal]
    coin = streams.stream("rewire")
    pick = streams.stream("replace")
    for m in marked:
        for agent in state.demanders_of(m):
            if isinstance(agent, ProducerState) and agent.marked_for_removal:
                continue
            _rewire_one(agent, m, live, coin, pick)
    return state


def regenerate_consumer(state: EconomyState, streams: SeedStreams, consumer: ConsumerState) -> EconomyState:
    """Redraw an orphaned consumer's providers and utility elasticities."""
    live = [y for y, p in state.producers.items() if not p.marked_for_removal]
    if not live:
        raise ValueError("no live producer to regenerate a consumer against")
    rng = streams.stream("regen")
    count = int(rng.integers(1, len(live) + 1))
    providers = sorted(int(x) for x in rng.choice(live, size=count, replace=False))
    raw = open_unit(rng, count + 2)
    consumer.good_elasticities = {s: float(a) for s, a in zip(providers, raw[:-2])}
    consumer.income_elasticity = float(raw[-2])
    consumer.leisure_elasticity = float(raw[-1])
    return state


def remove_marked(state: EconomyState) -> list[int]:
    gone = [y for y, p in state.producers.items() if p.marked_for_removal]
    for y in gone:
        state.removed[y] = state.producers.pop(y)
    return gone


def check_termination(state: EconomyState) -> str | None:
    n = len(state.producers)
    if n == 0:
        return PRODUCERS_EXHAUSTED
    if n == 1:
        return SINGLE_PRODUCER_LEFT
    if state.total_consumer_wealth() <= CONSUMER_WEALTH_ZERO * state.initial_consumer_wealth:
        return CONSUMER_WEALTH_ZERO_LABEL
    return None


# --------------------------------------------------------------------------
# The period
# --------------------------------------------------------------------------


def run_period(state: EconomyState, streams: SeedStreams) -> PeriodLedger:
    """Advance ``state`` by one period in place and return the period's ledger."""
    if state.halted:
        raise Halted(state.halted)

    ledger = PeriodLedger(
        demands=collect_demands(state),
        wage=state.wage,
        prices={y: p.price for y, p in state.producers.items()},
    )
    trade_goods(state, ledger)
    clear_labour_market(state, ledger)
    produce_and_update_inventory(state, ledger)
    adjust_prices(state, ledger)
    adjust_wage(state, ledger.excess_labour)
    distribute_profits(state, ledger)
    settle_consumer_wealth(state, ledger)

    if any(p.marked_for_removal for p in state.producers.values()):
        rewire_demanders(state, streams)
        if any(not p.marked_for_removal for p in state.producers.values()):
            for c in state.consumers.values():
                if not c.good_elasticities:
                    regenerate_consumer(state, streams, c)
        ledger.removed = remove_marked(state)

    state.period += 1
    state.halted = check_termination(state)
    return ledger


def advance_period(state: EconomyState, streams: SeedStreams):
    """Run one period; returns ``(state, PeriodRecord)``.

    A termination condition sets ``state.halted``; advancing a halted state
    raises :class:`Halted`.
    """
    from .metrics import period_record

    ledger = run_period(state, streams)
    return state, period_record(state, ledger)
