"""
Telling settled series from restless ones
=========================================

A run counts as settled when the smoothed period-to-period change of every
price and of the wage stays small late in the run.
"""

# %%
import numpy as np

from neteconomy.equilibrium import smoothed_differences, series_converged

t = np.arange(1000, dtype=float)
series = {
    "flat": np.full(1000, 5.0),
    "slow ramp": 0.01 * t,
    "damped wobble": 50 + 10 * np.exp(-t / 50) * np.sin(2 * np.pi * t / 37),
    "steady wobble": 50 + 10 * np.sin(2 * np.pi * t / 37),
}

# %%
for name, x in series.items():
    verdict = series_converged(x)
    tail = np.nanmax(np.abs(smoothed_differences(x)[500:900]))
    print(f"{name:14s} converged={verdict.converged!s:5s}  largest late change {tail:.2e}")
