"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the terminal summary.
The full-length sweeps take several minutes on one core.
"""

import json
import time
from collections import Counter

import numpy as np
import pytest

from neteconomy.equilibrium import DISEQUILIBRIUM, EQUILIBRIUM, series_converged
from neteconomy.optimizer import (
    ConsumerProblem,
    ProducerProblem,
    brute_force_oracle,
    consumer_choose_bundle,
    producer_choose_inputs,
)
from neteconomy.runner import seed_grid, simulate, sweep
from neteconomy.scenario import ScenarioConfig

DEFAULTS = ScenarioConfig()
HALTS = {"SingleProducerLeft", "ConsumerWealthZero", "ProducersExhausted"}


# --------------------------------------------------------------------------
# 1. money conservation
# --------------------------------------------------------------------------


def test_money_conservation(verdict):
    rng = np.random.default_rng(20240501)
    pairs = [tuple(int(s) for s in rng.integers(0, 2**31, size=2)) for _ in range(50)]
    worst, periods = 0.0, 0
    start = time.perf_counter()
    for s1, s2 in pairs:
        records = simulate(DEFAULTS, s1, s2, check_invariants=False, snapshots=False).records
        totals = np.array([r.total_producer_wealth + r.total_consumer_wealth for r in records])
        worst = max(worst, float(np.max(np.abs(totals - totals[0])) / totals[0]))
        periods += len(records) - 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 120
    verdict(1, ok, f"50 runs, {periods} periods, worst drift {worst:.2e} (tol 1e-6), {elapsed:.0f}s (target <120s)")
    assert worst <= 1e-6
    assert elapsed < 120


# --------------------------------------------------------------------------
# 2. optimizer against the grid oracle
# --------------------------------------------------------------------------


def random_producer(rng, interior):
    n = int(rng.integers(1, 5))
    raw = rng.uniform(0.05, 1.0, n)
    kappa = rng.uniform(0.2, 0.95) if interior else rng.uniform(0.2, 2.5)
    return ProducerProblem(
        price=rng.uniform(1.0, 20.0),
        tech=rng.uniform(1.0, 10.0),
        input_prices=rng.uniform(0.2, 5.0, n),
        elasticities=raw * kappa / raw.sum(),
        budget=rng.uniform(1.0, 100.0),
    )


def foc_residual(p, x):
    """Largest relative gap between marginal revenue product and input price."""
    marginal = p.elasticities * p.price * p.output(x) / x
    return float(np.max(np.abs(marginal / p.input_prices - 1.0)))


def test_optimizer_against_oracle(verdict):
    rng = np.random.default_rng(7)
    res = {1: 400, 2: 60, 3: 20, 4: 10}
    shortfall, budget_err, foc_err, interior_hits = 0.0, 0.0, 0.0, 0
    for k in range(1000):
        p = random_producer(rng, interior=k % 2 == 0)
        x = producer_choose_inputs(p).quantities
        cost = p.cost(x)
        budget_err = max(budget_err, (cost - p.budget) / p.budget)
        if p.elasticities.sum() < 1 and cost < p.budget * (1 - 1e-12):  # interior optimum chosen
            interior_hits += 1
            foc_err = max(foc_err, foc_residual(p, x))
            best = brute_force_oracle(p, grid_resolution=res[x.size]).quantities
            gap = p.profit(best) - p.profit(x)
        else:  # budget binds: best output value on the budget surface
            best = brute_force_oracle(p, grid_resolution=res[x.size], surface=True).quantities
            gap = p.output(best) - p.output(x)
        shortfall = max(shortfall, gap / max(1.0, abs(p.profit(x)), p.output(x)))

    c_short = 0.0
    for _ in range(500):
        n = int(rng.integers(1, 3))
        c = ConsumerProblem(
            goods_prices=rng.uniform(0.2, 20.0, n),
            goods_elasticities=rng.uniform(0.05, 1.0, n),
            income_elasticity=rng.uniform(0.05, 1.0),
            leisure_elasticity=rng.uniform(0.05, 1.0),
            wage=rng.uniform(0.5, 60.0),
            time_budget=24.0,
            expected_profit_income=rng.uniform(0.0, 100.0),
            budget=rng.uniform(10.0, 5000.0),
        )
        b = consumer_choose_bundle(c)
        budget_err = max(budget_err, (c.goods_prices @ b.quantities - c.budget) / c.budget)
        best = brute_force_oracle(c, grid_resolution=24)
        u = c.utility(b.quantities, b.labour_supply)
        c_short = max(c_short, (c.utility(best.quantities, best.labour_supply) - u) / u)

    ok = shortfall <= 1e-9 and c_short <= 1e-9 and budget_err <= 1e-9 and foc_err <= 1e-5
    verdict(
        2,
        ok,
        f"oracle shortfall producer {shortfall:.1e} consumer {c_short:.1e}; budget excess {budget_err:.1e} (tol 1e-9); "
        f"FOC {foc_err:.1e} over {interior_hits} interior optima (tol 1e-5)",
    )
    assert ok


# --------------------------------------------------------------------------
# 3. equilibrium detector
# --------------------------------------------------------------------------


def test_equilibrium_detector(verdict):
    t = np.arange(1000, dtype=float)
    cases = {
        "constant": (np.full(1000, 5.0), EQUILIBRIUM),
        "ramp 0.01": (0.01 * t, DISEQUILIBRIUM),
        "damped oscillation": (50 + 10 * np.exp(-t / 50) * np.sin(2 * np.pi * t / 37), EQUILIBRIUM),
        "oscillation amplitude 10": (50 + 10 * np.sin(2 * np.pi * t / 37), DISEQUILIBRIUM),
    }
    got = {name: EQUILIBRIUM if series_converged(x).converged else DISEQUILIBRIUM for name, (x, _) in cases.items()}
    ok = all(got[name] == want for name, (_, want) in cases.items())
    verdict(3, ok, "; ".join(f"{name} -> {got[name]}" for name in cases))
    assert ok


# --------------------------------------------------------------------------
# 4. determinism under parallelism
# --------------------------------------------------------------------------


def test_parallel_determinism(verdict, tmp_path):
    pairs = seed_grid(range(200, 210), range(300, 310))
    sweep(pairs, DEFAULTS, 1, tmp_path / "serial.jsonl")
    sweep(pairs, DEFAULTS, 8, tmp_path / "parallel.jsonl")
    a = (tmp_path / "serial.jsonl").read_bytes()
    b = (tmp_path / "parallel.jsonl").read_bytes()
    lines = a.count(b"\n")
    verdict(4, a == b and lines == 100, f"jobs=1 vs jobs=8 over {lines} runs: {'identical' if a == b else 'DIFFERENT'}")
    assert lines == 100
    assert a == b


# --------------------------------------------------------------------------
# 5-7. desk-scale reproduction (one shared 500-run sweep)
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def desk_runs(tmp_path_factory):
    path = tmp_path_factory.mktemp("desk") / "runs.jsonl"
    start = time.perf_counter()
    sweep(seed_grid(range(1, 21), range(101, 126)), DEFAULTS, 1, path)
    elapsed = time.perf_counter() - start
    return [json.loads(line) for line in path.read_text().splitlines()], elapsed


def test_distributional_reproduction(verdict, desk_runs):
    runs, elapsed = desk_runs
    n = len(runs)
    counts = Counter(r["outcome"] for r in runs)
    diseq = counts[DISEQUILIBRIUM] / n
    eq = counts[EQUILIBRIUM] / n
    completed = [r for r in runs if "shut_firms" in r]
    shut = float(np.mean([r["shut_firms"] for r in completed]))
    gini_c = float(np.mean([r["gini_consumers"] for r in completed]))
    checks = {
        "a": counts.most_common(1)[0][0] == DISEQUILIBRIUM and diseq > 0.5,
        "b": eq < 0.15,
        "c": 5 <= shut <= 9,
        "d": gini_c > 0.2,
        "time": elapsed < 1800,
    }
    verdict(
        5,
        all(checks.values()),
        f"{n} runs in {elapsed / 60:.1f} min; outcomes {dict(sorted(counts.items()))}; "
        f"(a) diseq {diseq:.1%} (b) eq {eq:.1%} (c) mean shut {shut:.2f} (d) mean final consumer Gini {gini_c:.3f}; "
        f"failed: {[k for k, v in checks.items() if not v] or 'none'}",
    )
    assert n == 500
    assert all(checks.values()), checks


def test_emergent_inequality(verdict, desk_runs):
    runs, _ = desk_runs
    start_equal = all(r.get("initial_gini_consumers") == 0.0 for r in runs)
    nonneg = all(r.get("gini_consumers", -1.0) >= 0.0 for r in runs)
    open_runs = [r for r in runs if r["outcome"] not in HALTS and "gini_consumers" in r]
    positive = sum(r["gini_consumers"] > 0 for r in open_runs) / len(open_runs)
    ok = start_equal and nonneg and positive > 0.9
    verdict(
        6,
        ok,
        f"t=0 Gini all exactly 0: {start_equal}; final Gini >= 0: {nonneg}; "
        f"positive in {positive:.1%} of {len(open_runs)} non-halted runs (need >90%)",
    )
    assert ok


def test_invariant_sweep(verdict, desk_runs):
    runs, _ = desk_runs
    failed = [r for r in runs if r["outcome"] == "RunFailed"]
    flagged = [r for r in runs if r.get("invariant_violations", 0) > 0]
    kinds = Counter()
    for r in flagged:
        msg = r["first_violation"]
        kinds["utility overflow" if "utility" in msg or "non-finite" in msg else msg.split(": ", 1)[-1][:40]] += 1
    ok = not failed and not flagged
    verdict(
        7,
        ok,
        f"{len(flagged)} of {len(runs)} runs with violations, {len(failed)} failed runs"
        + (f"; first-violation kinds {dict(kinds)}; e.g. ({flagged[0]['s1']},{flagged[0]['s2']}) {flagged[0]['first_violation']}" if flagged else ""),
    )
    assert not failed
    assert not flagged, f"{len(flagged)} runs violated invariants"
