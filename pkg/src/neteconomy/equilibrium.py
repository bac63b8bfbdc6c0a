"""Convergence test on price and wage histories and run classification.

A series counts as settled when the absolute first differences of its
rolling mean stay below a tolerance from some point in the scan window all
the way to the end of the run.  Smoothing lets a regular oscillation whose
mean is stationary pass; large-amplitude swings still fail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

EQUILIBRIUM = "Equilibrium"
DISEQUILIBRIUM = "Disequilibrium"

DEFAULT_TOLERANCE = 1e-3
DEFAULT_WINDOW = 100
DEFAULT_SCAN = range(500, 900)


class WindowTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SeriesVerdict:
    series_id: object
    converged: bool
    first_index: int | None = None


def rolling_average(series, window: int) -> np.ndarray:
    """``out[k] = mean(series[k:k+window])``; length ``len(series) - window + 1``."""
    x = np.asarray(series, dtype=float)
    if window < 1:
        raise ValueError("window must be positive")
    if window > x.size:
        raise WindowTooLarge(f"window {window} exceeds series length {x.size}")
    return sliding_window_view(x, window).mean(axis=1)


def smoothed_differences(series, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Absolute first differences of the trailing rolling mean, on the raw time axis.

    Entry ``t`` compares the means of ``series[t-window+1 : t+1]`` and the
    window one step earlier.  The first ``window`` entries are undefined
    (NaN), so the output has the same length as ``series``.
    """
    x = np.asarray(series, dtype=float)
    out = np.full(x.size, np.nan)
    if x.size <= window:
        return out
    out[window:] = np.abs(np.diff(rolling_average(x, window)))
    return out


def converged_tail(series, tolerance: float = DEFAULT_TOLERANCE, scan_window=DEFAULT_SCAN, series_id=None) -> SeriesVerdict:
    """Find the earliest start in ``scan_window`` after which every entry is below tolerance.

    ``series`` is a smoothed-difference sequence (see
    :func:`smoothed_differences`); NaN entries never count as converged.
    Scan positions past the end of the series are ignored.
    """
    d = np.asarray(series, dtype=float)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    below = d < tolerance  # NaN compares False
    # tail_ok[t] is True iff below[t:] is all True
    tail_ok = np.logical_and.accumulate(below[::-1])[::-1]
    for t in scan_window:
        if t >= d.size:
            break
        if t >= 0 and tail_ok[t]:
            return SeriesVerdict(series_id, True, int(t))
    return SeriesVerdict(series_id, False, None)


def series_converged(raw, tolerance=DEFAULT_TOLERANCE, window=DEFAULT_WINDOW, scan_window=DEFAULT_SCAN, series_id=None) -> SeriesVerdict:
    return converged_tail(smoothed_differences(raw, window), tolerance, scan_window, series_id)


def classify_run(
    price_histories: dict,
    wage_history,
    termination: str | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    window: int = DEFAULT_WINDOW,
    scan_window=DEFAULT_SCAN,
) -> str:
    """Outcome label of a finished run.

    A termination label wins outright.  Otherwise the run is in equilibrium
    only if every surviving firm's price history and the wage history pass
    the tail test.
    """
    if termination:
        return termination
    verdicts = [
        series_converged(h, tolerance, window, scan_window, series_id=k)
        for k, h in price_histories.items()
    ]
    verdicts.append(series_converged(wage_history, tolerance, window, scan_window, series_id="wage"))
    return EQUILIBRIUM if all(v.converged for v in verdicts) else DISEQUILIBRIUM
