"""Network economy simulator.

Producers and consumers with Cobb-Douglas objectives trade over a directed
network, out of equilibrium, with prices and the wage moving toward excess
demand.  Runs are fully determined by a pair of seeds.
"""

from .core import ConsumerState, EconomyState, ProducerState, SeedStreams, derive_streams, validate_economy
from .equilibrium import DISEQUILIBRIUM, EQUILIBRIUM, classify_run, series_converged
from .market import Halted, advance_period, run_period
from .metrics import PeriodRecord, gini
from .runner import RunResult, simulate, sweep
from .scenario import ConfigInvalid, ScenarioConfig, initial_state

__all__ = [
    "ConfigInvalid",
    "ConsumerState",
    "DISEQUILIBRIUM",
    "EQUILIBRIUM",
    "EconomyState",
    "Halted",
    "PeriodRecord",
    "ProducerState",
    "RunResult",
    "ScenarioConfig",
    "SeedStreams",
    "advance_period",
    "classify_run",
    "derive_streams",
    "gini",
    "initial_state",
    "run_period",
    "series_converged",
    "simulate",
    "sweep",
    "validate_economy",
]
