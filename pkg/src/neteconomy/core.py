"""Domain types, the directed trade graph and seeded random streams.

Agents carry dense integer ids assigned once at scenario creation.  Producers
take ids ``0 .. n_producers - 1`` and consumers follow; ids are never reused,
so share maps and provider sets stay unambiguous after firms shut down.

An edge ``(a, b)`` means ``a`` sells to ``b``.  The edge set is not stored
separately: it is read off the buyers' elasticity maps, whose keys are their
providers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1

ELASTICITY_TOL = 1e-9
SHARES_TOL = 1e-9


# --------------------------------------------------------------------------
# Seeded streams
# --------------------------------------------------------------------------


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state once.

    Returns ``(new_state, output)``; both are 64-bit unsigned integers.
    """
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


# Which seed feeds which named stream.  s1 drives prices, returns to scale
# and shareholding; s2 drives the network (elasticities, providers) and the
# structural changes that happen to it during a run.
S1_STREAMS = ("prices", "kappa", "shareholders", "shares")
S2_STREAMS = ("elasticities", "provider_counts", "providers", "rewire", "replace", "regen")


def derive_stream_seed(seed: int, name: str) -> list[int]:
    """Four 64-bit words derived from ``(seed, name)`` by SplitMix64.

    The words seed a PCG64 generator through numpy's ``SeedSequence``, which
    is specified bit-for-bit and therefore platform independent.
    """
    state = (seed & MASK64) ^ _fnv1a64(name)
    words = []
    for _ in range(4):
        state, out = splitmix64(state)
        words.append(out)
    return words


class SeedStreams:
    """Named, independent random streams for one run.

    ``stream(name)`` returns the same stateful generator on every call, so
    draws continue where they left off.  A stream's draw sequence is a pure
    function of its seed and its name.
    """

    def __init__(self, s1: int, s2: int):
        self.s1 = int(s1)
        self.s2 = int(s2)
        self._streams: dict[str, np.random.Generator] = {}

    def seed_for(self, name: str) -> int:
        if name in S1_STREAMS:
            return self.s1
        if name in S2_STREAMS:
            return self.s2
        raise KeyError(f"unknown stream {name!r}")

    def stream(self, name: str) -> np.random.Generator:
        try:
            return self._streams[name]
        except KeyError:
            words = derive_stream_seed(self.seed_for(name), name)
            gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))
            self._streams[name] = gen
            return gen

    def __repr__(self):
        return f"SeedStreams(s1={self.s1}, s2={self.s2})"


def open_unit(rng: np.random.Generator, size: int | None = None):
    """Uniform draws on the open interval (0, 1); exact zeros are redrawn."""
    if size is None:
        x = rng.random()
        while x == 0.0:
            x = rng.random()
        return float(x)
    out = rng.random(size)
    while np.any(out == 0.0):
        zero = out == 0.0
        out[zero] = rng.random(int(zero.sum()))
    return out


def derive_streams(s1: int, s2: int) -> SeedStreams:
    return SeedStreams(s1, s2)


# --------------------------------------------------------------------------
# Agents and economy
# --------------------------------------------------------------------------


@dataclass
class ProducerState:
    id: int
    tech_A: float
    labour_elasticity: float
    input_elasticities: dict[int, float]
    kappa: float
    price: float
    price_adjust: float
    inventory: float
    wealth: float
    prr: float
    shares: dict[int, float]
    last_demand: float = 0.0
    marked_for_removal: bool = False

    @property
    def providers(self) -> list[int]:
        return list(self.input_elasticities)

    def elasticity_total(self) -> float:
        return math.fsum(self.input_elasticities.values()) + self.labour_elasticity


@dataclass
class ConsumerState:
    id: int
    good_elasticities: dict[int, float]
    income_elasticity: float
    leisure_elasticity: float
    time_budget: float
    wealth: float
    last_profit_income: float = 0.0
    last_labour_sold: float = 0.0
    last_utility: float = 0.0

    @property
    def providers(self) -> list[int]:
        return list(self.good_elasticities)

    def elasticity_total(self) -> float:
        return (
            math.fsum(self.good_elasticities.values())
            + self.income_elasticity
            + self.leisure_elasticity
        )


@dataclass
class EconomyState:
    """The whole mutable world of one run.

    ``removed`` keeps shut-down firms with their wealth frozen at removal;
    they no longer trade but their wealth still counts toward producer
    totals, so total money is conserved.
    """

    period: int
    producers: dict[int, ProducerState]
    consumers: dict[int, ConsumerState]
    wage: float
    wage_adjust: float
    halted: str | None = None
    removed: dict[int, ProducerState] = field(default_factory=dict)
    initial_consumer_wealth: float = 0.0

    def buyers(self):
        """Every agent that can hold providers, producers first."""
        yield from self.producers.values()
        yield from self.consumers.values()

    @property
    def graph(self) -> set[tuple[int, int]]:
        """Directed edges ``(seller, buyer)``."""
        edges = set()
        for p in self.producers.values():
            edges.update((s, p.id) for s in p.input_elasticities)
        for c in self.consumers.values():
            edges.update((s, c.id) for s in c.good_elasticities)
        return edges

    def demanders_of(self, producer_id: int) -> list[ProducerState | ConsumerState]:
        out = [p for p in self.producers.values() if producer_id in p.input_elasticities]
        out += [c for c in self.consumers.values() if producer_id in c.good_elasticities]
        return out

    def total_producer_wealth(self) -> float:
        return math.fsum(
            [p.wealth for p in self.producers.values()]
            + [p.wealth for p in self.removed.values()]
        )

    def total_consumer_wealth(self) -> float:
        return math.fsum(c.wealth for c in self.consumers.values())

    def total_wealth(self) -> float:
        return self.total_producer_wealth() + self.total_consumer_wealth()


def _finite(x: float) -> bool:
    return math.isfinite(x)


def validate_economy(state: EconomyState) -> list[str]:
    """Describe every broken type invariant; an empty list means healthy."""
    problems = []
    live = state.producers

    if not (_finite(state.wage) and state.wage > 0):
        problems.append(f"wage not positive: {state.wage!r}")
    if not (_finite(state.wage_adjust) and state.wage_adjust > 0):
        problems.append(f"wage adjustment factor not positive: {state.wage_adjust!r}")

    for p in live.values():
        tag = f"producer {p.id}"
        for s in p.input_elasticities:
            if s not in live:
                problems.append(f"{tag} buys from non-live producer {s}")
            if s == p.id:
                problems.append(f"{tag} buys from itself")
        total = p.elasticity_total()
        if not abs(total - p.kappa) <= ELASTICITY_TOL * max(1.0, p.kappa):
            problems.append(f"{tag} elasticities sum to {total!r}, kappa is {p.kappa!r}")
        if p.shares:
            share_sum = math.fsum(p.shares.values())
            if abs(share_sum - 1.0) > SHARES_TOL:
                problems.append(f"{tag} shares sum to {share_sum!r}")
            if any(not 0.0 <= s <= 1.0 for s in p.shares.values()):
                problems.append(f"{tag} has a share outside [0, 1]")
        else:
            problems.append(f"{tag} has no shareholders")
        if not (_finite(p.price) and p.price > 0):
            problems.append(f"{tag} price not positive: {p.price!r}")
        if not (_finite(p.price_adjust) and p.price_adjust > 0):
            problems.append(f"{tag} price adjustment factor not positive: {p.price_adjust!r}")
        if not (_finite(p.inventory) and p.inventory >= 0):
            problems.append(f"{tag} inventory negative: {p.inventory!r}")
        if not _finite(p.wealth):
            problems.append(f"{tag} wealth not finite: {p.wealth!r}")
        if not (0.0 <= p.prr <= 1.0):
            problems.append(f"{tag} PRR outside [0, 1]: {p.prr!r}")

    for c in state.consumers.values():
        tag = f"consumer {c.id}"
        for s in c.good_elasticities:
            if s not in live:
                problems.append(f"{tag} buys from non-live producer {s}")
        if not (0.0 <= c.last_labour_sold <= c.time_budget):
            problems.append(f"{tag} labour sold {c.last_labour_sold!r} outside [0, T]")
        for name in ("wealth", "last_profit_income", "last_utility"):
            v = getattr(c, name)
            if not _finite(v):
                problems.append(f"{tag} {name} not finite: {v!r}")
        if c.last_profit_income < 0:
            problems.append(f"{tag} negative profit income {c.last_profit_income!r}")

    return problems
