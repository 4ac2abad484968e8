import math

import numpy as np
import pytest

from safestock.metrics import (
    RunMetrics,
    compute_ci,
    measure_execution_time,
    moving_average,
    plateau_episode,
)


class TestComputeCi:
    def test_hand_computed_example(self):
        low, high = compute_ci([2, 4, 4, 4, 5, 5, 7, 9])
        assert low == pytest.approx(3.52, abs=0.01)
        assert high == pytest.approx(6.48, abs=0.01)

    def test_constant_samples_zero_width(self):
        assert compute_ci([5, 5, 5, 5]) == (5.0, 5.0)

    def test_symmetric_about_mean(self):
        values = [1.0, 2.5, 4.0, 7.0, 9.5]
        low, high = compute_ci(values)
        mean = sum(values) / len(values)
        assert (mean - low) == pytest.approx(high - mean, rel=1e-12)

    def test_too_few_samples(self):
        with pytest.raises(ValueError, match="at least 2"):
            compute_ci([1.0])

    def test_t_interval_is_wider(self):
        values = [2, 4, 4, 4, 5, 5, 7, 9]
        n_low, n_high = compute_ci(values)
        t_low, t_high = compute_ci(values, use_t=True)
        assert t_low < n_low and t_high > n_high


class TestMovingAverage:
    def test_constant_input(self):
        assert moving_average([1.0] * 25, 10) == [1.0] * 25

    def test_two_values_window_two(self):
        assert moving_average([0.0, 10.0], 2) == [0.0, 5.0]

    def test_linear_ramp_tail(self):
        ramp = list(range(1, 101))
        smoothed = moving_average(ramp, 10)
        assert smoothed[-1] == pytest.approx(95.5)   # mean of 91..100
        assert smoothed[0] == 1.0
        assert smoothed[4] == pytest.approx(3.0)     # prefix warm-up

    def test_window_validation(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)


class TestPlateauEpisode:
    def test_constant_sequence(self):
        assert plateau_episode([3.0] * 40) == 0

    def test_step_function(self):
        values = [-100.0] * 17 + [-10.0] * 23
        assert plateau_episode(values) == 17

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            plateau_episode([])

    def test_exponential_approach_matches_analytic_crossing(self):
        # v(t) = -100 - 80 exp(-t/tau): last excursion beyond the 10% band
        # around the final value is predictable in closed form
        tau, n = 60.0, 900
        rng = np.random.default_rng(6)
        raw = [-100.0 - 80.0 * math.exp(-t / tau) + rng.normal(0, 0.05)
               for t in range(n)]
        smoothed = moving_average(raw, 10)
        final = smoothed[-1]
        band = 0.10 * abs(final)
        # closed form on the noise-free signal: 80 exp(-t/tau) - gap = band
        gap = 80.0 * math.exp(-(n - 5.5) / tau)
        analytic = -tau * math.log((band + gap) / 80.0)
        measured = plateau_episode(smoothed)
        assert measured == pytest.approx(analytic + 4.5, abs=0.1 * analytic)


def metrics_with_times(times):
    return [RunMetrics(i, -1.0, 0, 0, 0, 0, t) for i, t in enumerate(times)]


class TestExecutionTime:
    def test_mean_excludes_first_episode(self):
        ms = metrics_with_times([9.0, 1.0, 2.0, 3.0, 2.0])
        assert measure_execution_time(ms) == pytest.approx(2.0)

    def test_needs_five_episodes(self):
        with pytest.raises(ValueError, match="at least 5"):
            measure_execution_time(metrics_with_times([1.0] * 4))
