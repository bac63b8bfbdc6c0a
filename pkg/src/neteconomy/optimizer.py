"""Closed-form Cobb-Douglas choices for producers and consumers.

Producers maximise ``P*A*prod(x**a) - sum(p*x)`` under a wealth budget.  With
decreasing returns the interior stationary point solves a log-linear system;
otherwise (or when that point is unaffordable) the budget is split in
proportion to the elasticities, which is the constrained maximum of an
explicitly quasiconcave objective on a hyperplane.

Labour is treated as one more input: its wage is the last price and its
elasticity the last elasticity.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass

import numpy as np

# Below this distance from constant returns the log-linear system is treated
# as singular and the budget-share rule is used instead.
CONSTANT_RETURNS_TOL = 1e-9
LOG_FLOAT_MAX = math.log(sys.float_info.max)


class SingularSystem(ArithmeticError):
    """The first-order system has no unique solution (constant returns)."""


@dataclass
class ProducerProblem:
    price: float
    tech: float
    input_prices: np.ndarray
    elasticities: np.ndarray
    budget: float

    def __post_init__(self):
        self.input_prices = np.asarray(self.input_prices, dtype=float)
        self.elasticities = np.asarray(self.elasticities, dtype=float)
        if self.input_prices.shape != self.elasticities.shape:
            raise ValueError("input_prices and elasticities differ in length")
        if np.any(self.input_prices <= 0) or self.price <= 0:
            raise ValueError("prices must be positive")

    def output(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            return 0.0
        return self.tech * float(np.exp(np.dot(self.elasticities, np.log(x))))

    def profit(self, x) -> float:
        return self.price * self.output(x) - float(np.dot(self.input_prices, x))

    def cost(self, x) -> float:
        return float(np.dot(self.input_prices, x))


@dataclass
class ConsumerProblem:
    goods_prices: np.ndarray
    goods_elasticities: np.ndarray
    income_elasticity: float
    leisure_elasticity: float
    wage: float
    time_budget: float
    expected_profit_income: float
    budget: float

    def __post_init__(self):
        self.goods_prices = np.asarray(self.goods_prices, dtype=float)
        self.goods_elasticities = np.asarray(self.goods_elasticities, dtype=float)
        if self.goods_prices.shape != self.goods_elasticities.shape:
            raise ValueError("goods_prices and goods_elasticities differ in length")

    def elasticity_total(self) -> float:
        return float(self.goods_elasticities.sum()) + self.income_elasticity + self.leisure_elasticity

    def goods_budget(self) -> float:
        """Share of wealth the closed-form rule spends on goods."""
        if self.budget <= 0:
            return 0.0
        return self.budget * float(self.goods_elasticities.sum()) / self.elasticity_total()

    def utility(self, quantities, labour: float) -> float:
        return consumer_utility(
            quantities,
            self.goods_elasticities,
            self.income_elasticity,
            self.leisure_elasticity,
            self.wage,
            labour,
            self.expected_profit_income,
            self.time_budget,
        )


@dataclass
class Bundle:
    quantities: np.ndarray
    labour_supply: float | None = None

    def cost(self, prices) -> float:
        return float(np.dot(prices, self.quantities))


def consumer_utility(quantities, elasticities, beta, gamma, wage, labour, profit_income, time_budget):
    """Cobb-Douglas utility of goods, income and leisure; zero if any factor is zero.

    Returns ``inf`` rather than raising when the value exceeds the float range.
    """
    income = wage * labour + profit_income
    leisure = time_budget - labour
    if income <= 0 or leisure <= 0:
        return 0.0
    log_u = beta * math.log(income) + gamma * math.log(leisure)
    for q, a in zip(quantities, elasticities):
        if q <= 0:
            return 0.0
        log_u += a * math.log(q)
    if log_u > LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_u)


# --------------------------------------------------------------------------
# Producers
# --------------------------------------------------------------------------


def _log_linear_system(p: ProducerProblem) -> tuple[np.ndarray, np.ndarray]:
    a = p.elasticities
    n = a.size
    M = np.tile(a, (n, 1)) - np.eye(n)
    b = np.log(p.input_prices / (a * p.price * p.tech))
    return M, b


def unconstrained_log_solution(p: ProducerProblem) -> np.ndarray:
    """``log(x*)`` for the interior profit maximum.

    Working in logs keeps unaffordable (astronomically large) optima from
    overflowing before they are compared against the budget.
    """
    total = float(p.elasticities.sum())
    if abs(total - 1.0) < CONSTANT_RETURNS_TOL:
        raise SingularSystem(f"elasticities sum to {total!r}; system is singular")
    if total > 1.0:
        raise ValueError("increasing returns: no interior profit maximum")
    M, b = _log_linear_system(p)
    return np.linalg.solve(M, b)


def solve_unconstrained_producer(p: ProducerProblem) -> Bundle:
    with np.errstate(over="ignore"):
        return Bundle(np.exp(unconstrained_log_solution(p)))


def solve_constrained_shares(elasticities, prices, budget: float) -> Bundle:
    """Spend ``budget`` across inputs in proportion to their elasticities."""
    a = np.asarray(elasticities, dtype=float)
    prices = np.asarray(prices, dtype=float)
    if budget <= 0:
        return Bundle(np.zeros_like(a))
    return Bundle(a * budget / (prices * a.sum()))


def producer_choose_inputs(p: ProducerProblem) -> Bundle:
    """Profit-maximising input bundle within the wealth budget."""
    if p.budget <= 0:
        return Bundle(np.zeros_like(p.elasticities))
    total = float(p.elasticities.sum())
    if total < 1.0 - CONSTANT_RETURNS_TOL:
        log_x = unconstrained_log_solution(p)
        log_terms = log_x + np.log(p.input_prices)
        top = log_terms.max()
        log_cost = float(top + np.log(np.exp(log_terms - top).sum()))
        if log_cost <= math.log(p.budget):
            return Bundle(np.exp(log_x))
    return solve_constrained_shares(p.elasticities, p.input_prices, p.budget)


# --------------------------------------------------------------------------
# Consumers
# --------------------------------------------------------------------------


def optimal_labour_supply(beta, gamma, wage, time_budget, profit_income) -> float:
    """Income/leisure split, clamped to the feasible range ``[0, T]``."""
    raw = (wage * beta * time_budget - gamma * profit_income) / (wage * (beta + gamma))
    if np.ndim(raw):
        return np.clip(raw, 0.0, time_budget)
    return min(max(float(raw), 0.0), float(time_budget))


def consumer_choose_bundle(c: ConsumerProblem) -> Bundle:
    if c.budget > 0:
        q = c.goods_elasticities * c.budget / (c.goods_prices * c.elasticity_total())
    else:
        q = np.zeros_like(c.goods_elasticities)
    labour = optimal_labour_supply(
        c.income_elasticity, c.leisure_elasticity, c.wage, c.time_budget, c.expected_profit_income
    )
    return Bundle(q, labour_supply=labour)


# --------------------------------------------------------------------------
# Grid-search oracle (tests only)
# --------------------------------------------------------------------------


def _simplex_grid(dim: int, resolution: int):
    """Points of the ``dim``-simplex whose coordinates are multiples of 1/resolution."""
    for head in itertools.product(range(resolution + 1), repeat=dim - 1):
        rest = resolution - sum(head)
        if rest >= 0:
            yield np.array(head + (rest,), dtype=float) / resolution


def brute_force_oracle(problem, grid_resolution: int = 50, surface: bool = False) -> Bundle:
    """Best gridpoint of the problem's feasible set.

    Producer problems are searched over the whole budget box ``cost <= W``
    for maximum profit, or with ``surface=True`` over the budget hyperplane
    ``cost == W`` for maximum output value.  Consumer problems are searched
    over the goods-budget hyperplane times a labour grid on ``[0, T]``.
    """
    if isinstance(problem, ProducerProblem):
        return _producer_oracle(problem, grid_resolution, surface)
    if isinstance(problem, ConsumerProblem):
        return _consumer_oracle(problem, grid_resolution)
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


def _producer_oracle(p: ProducerProblem, res: int, surface: bool) -> Bundle:
    n = p.elasticities.size
    if n > 4:
        raise ValueError("oracle limited to 4 dimensions")
    W = p.budget
    best_x, best_v = np.zeros(n), -math.inf
    if surface:
        for shares in _simplex_grid(n, res):
            x = shares * W / p.input_prices
            v = p.price * p.output(x)
            if v > best_v:
                best_x, best_v = x, v
        return Bundle(best_x)

    axes = [np.linspace(0.0, W / price, res + 1) for price in p.input_prices]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    cost = mesh @ p.input_prices
    mesh = mesh[cost <= W * (1 + 1e-12)]
    with np.errstate(divide="ignore"):
        logs = np.log(mesh)
    out = np.where(np.all(mesh > 0, axis=1), p.tech * np.exp(logs @ p.elasticities), 0.0)
    profit = p.price * out - mesh @ p.input_prices
    i = int(np.argmax(profit))
    return Bundle(mesh[i])


def _consumer_oracle(c: ConsumerProblem, res: int) -> Bundle:
    n = c.goods_elasticities.size
    if n > 4:
        raise ValueError("oracle limited to 4 dimensions")
    goods_budget = c.goods_budget()
    labour_grid = np.linspace(0.0, c.time_budget, res + 1)
    best_q, best_L, best_u = np.zeros(n), 0.0, -math.inf
    shares_list = list(_simplex_grid(n, res)) if n else [np.zeros(0)]
    for shares in shares_list:
        q = shares * goods_budget / c.goods_prices
        for L in labour_grid:
            u = c.utility(q, L)
            if u > best_u:
                best_q, best_L, best_u = q, float(L), u
    return Bundle(best_q, labour_supply=best_L)
