"""
One economy, start to finish
============================

Build a seeded economy, run it to the horizon and look at what happened.
"""

# %%
import numpy as np

from neteconomy import ScenarioConfig, simulate

config = ScenarioConfig()
result = simulate(config, 78, 178)
print(result.outcome.outcome, "after", result.outcome.periods, "periods")

# %%
# Money is only moved around, never created: total wealth stays put.
totals = np.array([r.total_producer_wealth + r.total_consumer_wealth for r in result.records])
print("largest relative drift:", np.max(np.abs(totals / totals[0] - 1)))

# %%
# Everyone starts equal; inequality emerges from trade.
gini = np.array([r.gini_consumers for r in result.records])
for t in (0, 10, 100, len(gini) - 1):
    print(f"t={t:4d}  consumer Gini {gini[t]:.3f}")

# %%
# Wage path, sampled every 100 periods.
wage = np.array([r.wage for r in result.records])
print(np.round(wage[::100], 3))

# %%
# Firms that went under and were replaced along the way.
print("shut firms:", result.outcome.shut_firms, " live producers:", result.outcome.live_producers)
