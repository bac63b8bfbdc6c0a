"""
Closed-form choices against brute force
=======================================

Producers pick inputs by solving a log-linear system, or split the budget by
elasticity shares when it binds.  A grid search over the feasible set should
never do better.
"""

# %%
import numpy as np

from neteconomy.optimizer import (
    ConsumerProblem,
    ProducerProblem,
    brute_force_oracle,
    consumer_choose_bundle,
    producer_choose_inputs,
)

# %%
# Decreasing returns and a roomy budget: the interior optimum is affordable.
p = ProducerProblem(price=10.0, tech=2.0, input_prices=[1.0, 2.0], elasticities=[0.3, 0.4], budget=1e4)
x = producer_choose_inputs(p).quantities
grid = brute_force_oracle(p, grid_resolution=200).quantities
print("closed form", x, "profit", p.profit(x))
print("grid best  ", grid, "profit", p.profit(grid))

# %%
# At the optimum each input's marginal revenue product equals its price.
print(p.elasticities * p.price * p.output(x) / x, p.input_prices)

# %%
# Shrink the budget until it binds: all of it is spent, split by elasticity.
p.budget = 5.0
x = producer_choose_inputs(p).quantities
print(x, "spend", p.cost(x), "shares", x * p.input_prices / p.cost(x))

# %%
# Consumers: goods by budget shares, labour from the income/leisure trade-off.
c = ConsumerProblem(
    goods_prices=np.array([2.0, 5.0]),
    goods_elasticities=np.array([0.5, 0.25]),
    income_elasticity=0.6,
    leisure_elasticity=0.4,
    wage=12.0,
    time_budget=24.0,
    expected_profit_income=30.0,
    budget=100.0,
)
b = consumer_choose_bundle(c)
best = brute_force_oracle(c, grid_resolution=60)
print("closed form", b.quantities, b.labour_supply, c.utility(b.quantities, b.labour_supply))
print("grid best  ", best.quantities, best.labour_supply, c.utility(best.quantities, best.labour_supply))
