"""Run configuration and initial-state sampling.

The two seeds split the initial conditions: ``s1`` draws prices, returns to
scale and the shareholder structure, ``s2`` draws the trade network
(provider sets and elasticities).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .core import ConsumerState, EconomyState, ProducerState, SeedStreams, open_unit


class ConfigInvalid(ValueError):
    """A configuration value is out of range; ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    n_producers: int = 10
    n_consumers: int = 80
    initial_producer_wealth: float = 1_000_000.0
    initial_consumer_wealth: float = 1_000.0
    wage_adjust: float = 0.0005
    price_adjust: float = 0.3
    # Used as the constant technology level A of every firm.
    rate_of_technological_change: float = 10.0
    # Carried for completeness; no model rule reads it.
    time_period: int = 365
    profit_reinvestment_ratio: float = 0.9
    initial_wage: float = 30.0
    price_low: float = 0.0
    price_high: float = 100.0
    kappa_mean: float = 0.9
    kappa_std: float = 0.6
    time_budget: float = 24.0
    horizon: int = 1000
    equilibrium_tolerance: float = 1e-3
    rolling_window: int = 100
    scan_start: int = 500
    scan_stop: int = 900

    def validate(self) -> None:
        positive_int = ("n_producers", "n_consumers", "horizon", "rolling_window")
        for name in positive_int:
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigInvalid(name, f"must be a positive integer, got {value!r}")
        positive = (
            "initial_producer_wealth", "wage_adjust", "price_adjust",
            "rate_of_technological_change", "initial_wage", "time_budget",
            "equilibrium_tolerance", "kappa_std",
        )
        for name in positive:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigInvalid(name, f"must be a positive number, got {value!r}")
        if not (math.isfinite(self.initial_consumer_wealth) and self.initial_consumer_wealth > 0):
            raise ConfigInvalid("initial_consumer_wealth", "must be a positive number")
        if not 0.0 <= self.profit_reinvestment_ratio <= 1.0:
            raise ConfigInvalid("profit_reinvestment_ratio", "must lie in [0, 1]")
        if not (0.0 <= self.price_low < self.price_high and math.isfinite(self.price_high)):
            raise ConfigInvalid("price_high", "need 0 <= price_low < price_high")
        if not math.isfinite(self.kappa_mean):
            raise ConfigInvalid("kappa_mean", "must be finite")
        if not 0 <= self.scan_start < self.scan_stop:
            raise ConfigInvalid("scan_stop", "need 0 <= scan_start < scan_stop")

    # -- JSON ----------------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigInvalid(unknown[0], "unknown configuration key")
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def from_json(cls, path) -> ScenarioConfig:
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigInvalid("<file>", f"not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("<file>", "top level must be an object")
        return cls.from_dict(data)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _draw_price(rng, low, high) -> float:
    p = float(rng.uniform(low, high))
    while p <= 0.0:
        p = float(rng.uniform(low, high))
    return p


def _draw_kappa(rng, mean, std) -> float:
    k = abs(float(rng.normal(mean, std)))
    while k == 0.0:
        k = abs(float(rng.normal(mean, std)))
    return k


def sample_scenario(config: ScenarioConfig, streams: SeedStreams) -> EconomyState:
    config.validate()
    n_p, n_c = config.n_producers, config.n_consumers
    producer_ids = list(range(n_p))
    consumer_ids = list(range(n_p, n_p + n_c))

    prices_rng = streams.stream("prices")
    kappa_rng = streams.stream("kappa")
    holders_rng = streams.stream("shareholders")
    shares_rng = streams.stream("shares")
    elast_rng = streams.stream("elasticities")
    count_rng = streams.stream("provider_counts")
    prov_rng = streams.stream("providers")

    producers = {}
    for y in producer_ids:
        price = _draw_price(prices_rng, config.price_low, config.price_high)
        kappa = _draw_kappa(kappa_rng, config.kappa_mean, config.kappa_std)

        n_holders = int(holders_rng.integers(1, n_c + 1))
        holders = sorted(int(j) for j in holders_rng.choice(consumer_ids, size=n_holders, replace=False))
        raw_shares = open_unit(shares_rng, n_holders)
        raw_shares = raw_shares / raw_shares.sum()
        shares = {j: float(s) for j, s in zip(holders, raw_shares)}

        candidates = [x for x in producer_ids if x != y]
        providers = _draw_providers(count_rng, prov_rng, candidates)
        raw = open_unit(elast_rng, len(providers) + 1)
        raw = raw * (kappa / raw.sum())
        producers[y] = ProducerState(
            id=y,
            tech_A=float(config.rate_of_technological_change),
            labour_elasticity=float(raw[-1]),
            input_elasticities={s: float(a) for s, a in zip(providers, raw[:-1])},
            kappa=kappa,
            price=price,
            price_adjust=float(config.price_adjust),
            inventory=0.0,
            wealth=float(config.initial_producer_wealth),
            prr=float(config.profit_reinvestment_ratio),
            shares=shares,
        )

    consumers = {}
    for j in consumer_ids:
        providers = _draw_providers(count_rng, prov_rng, producer_ids)
        raw = open_unit(elast_rng, len(providers) + 2)
        consumers[j] = ConsumerState(
            id=j,
            good_elasticities={s: float(a) for s, a in zip(providers, raw[:-2])},
            income_elasticity=float(raw[-2]),
            leisure_elasticity=float(raw[-1]),
            time_budget=float(config.time_budget),
            wealth=float(config.initial_consumer_wealth),
        )

    return EconomyState(
        period=0,
        producers=producers,
        consumers=consumers,
        wage=float(config.initial_wage),
        wage_adjust=float(config.wage_adjust),
        initial_consumer_wealth=float(config.initial_consumer_wealth) * n_c,
    )


def _draw_providers(count_rng, prov_rng, candidates) -> list[int]:
    """Uniform provider count in ``1..len(candidates)``, then a uniform sample."""
    if not candidates:
        return []
    count = int(count_rng.integers(1, len(candidates) + 1))
    return sorted(int(x) for x in prov_rng.choice(candidates, size=count, replace=False))


def bootstrap_inventories(state: EconomyState) -> EconomyState:
    """Stock every firm with exactly the demand it will face in period 1."""
    from .market import collect_demands

    demands = collect_demands(state)
    for y, p in state.producers.items():
        p.inventory = demands.market_demand[y]
    return state


def initial_state(config: ScenarioConfig, streams: SeedStreams) -> EconomyState:
    return bootstrap_inventories(sample_scenario(config, streams))
