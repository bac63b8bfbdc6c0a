import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neteconomy.equilibrium import (
    DISEQUILIBRIUM,
    EQUILIBRIUM,
    WindowTooLarge,
    classify_run,
    converged_tail,
    rolling_average,
    series_converged,
    smoothed_differences,
)

T = 1000
t = np.arange(T, dtype=float)


def test_rolling_average_examples():
    np.testing.assert_allclose(rolling_average([0, 1, 2, 3], 2), [0.5, 1.5, 2.5])
    x = np.random.default_rng(0).normal(size=20)
    np.testing.assert_allclose(rolling_average(x, 1), x)
    np.testing.assert_allclose(rolling_average(np.full(10, 3.0), 4), np.full(7, 3.0))


def test_rolling_average_window_too_large():
    with pytest.raises(WindowTooLarge):
        rolling_average([1.0, 2.0], 3)


def test_smoothed_differences_alignment():
    d = smoothed_differences(0.01 * t, 100)
    assert d.shape == (T,)
    assert np.isnan(d[:100]).all()
    np.testing.assert_allclose(d[100:], 0.01, rtol=1e-9)


def test_constant_converges_at_scan_start():
    v = series_converged(np.full(T, 4.2))
    assert v.converged and v.first_index == 500


def test_ramp_fails():
    assert not series_converged(0.01 * t).converged


def test_late_spike_fails():
    x = np.full(T, 1.0)
    x[950] += 1.0
    assert not series_converged(x).converged


def test_damped_oscillation_converges():
    x = 50.0 + 10.0 * np.exp(-t / 40.0) * np.sin(2 * np.pi * t / 37.0)
    assert series_converged(x).converged


@pytest.mark.parametrize("period", [7.0, 37.0, 130.0])
def test_large_oscillation_fails(period):
    x = 50.0 + 10.0 * np.sin(2 * np.pi * t / period)
    assert not series_converged(x).converged


def test_oscillation_with_window_multiple_period_passes():
    # a 100-sample window averages a period-25 wave away exactly
    x = 50.0 + 10.0 * np.sin(2 * np.pi * t / 25.0)
    assert series_converged(x).converged


def test_short_series_never_converges():
    assert not series_converged(np.ones(400)).converged


def test_nonpositive_tolerance():
    with pytest.raises(ValueError):
        converged_tail(np.zeros(T), tolerance=0.0)


def test_constant_tail_converges():
    # anything before the last 199 + window points may wander freely
    x = np.random.default_rng(1).normal(scale=100, size=T)
    x[T - 299:] = 3.0
    assert series_converged(x).converged


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(0.01, 100.0), st.integers(0, 2**32 - 1))
def test_shift_and_scale(shift, scale, seed):
    x = np.cumsum(np.random.default_rng(seed).normal(scale=1e-4, size=T))
    base = smoothed_differences(x)
    np.testing.assert_allclose(smoothed_differences(x + shift)[100:], base[100:], atol=1e-9 * max(1.0, abs(shift)))
    np.testing.assert_allclose(smoothed_differences(scale * x)[100:], scale * base[100:], rtol=1e-6, atol=1e-12)
    assert series_converged(x + 1.0).converged == series_converged(x).converged


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-4, 1e-2), st.floats(1.0, 100.0))
def test_tolerance_monotone(seed, tol, factor):
    x = np.cumsum(np.random.default_rng(seed).normal(scale=3e-3, size=T))
    if series_converged(x, tolerance=tol).converged:
        assert series_converged(x, tolerance=tol * factor).converged


def test_classify_all_constant():
    prices = {0: np.full(T, 3.0), 4: np.full(T, 8.0)}
    assert classify_run(prices, np.full(T, 30.0)) == EQUILIBRIUM


def test_classify_one_oscillating_price():
    prices = {0: np.full(T, 3.0), 4: 50 + 10 * np.sin(2 * np.pi * t / 37.0)}
    assert classify_run(prices, np.full(T, 30.0)) == DISEQUILIBRIUM


def test_classify_wage_counts():
    assert classify_run({0: np.full(T, 3.0)}, 0.01 * t) == DISEQUILIBRIUM


def test_termination_label_wins():
    assert classify_run({0: np.ones(137)}, np.ones(137), termination="SingleProducerLeft") == "SingleProducerLeft"
