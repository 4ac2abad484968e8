"""Per-episode telemetry and the statistics used to compare training runs."""

import math
from dataclasses import dataclass
from statistics import NormalDist


@dataclass(frozen=True)
class RunMetrics:
    """One training or evaluation episode, summarised."""

    episode: int
    total_reward: float
    mean_inv_factory: float
    mean_inv_warehouse: float
    mean_rp: float
    stockout_units: int
    wall_time: float


class EpisodeStats:
    """Accumulates step outcomes into a RunMetrics record."""

    def __init__(self):
        self.steps = 0
        self.total_reward = 0.0
        self.sum_inv_factory = 0
        self.sum_inv_warehouse = 0
        self.sum_rp = 0
        self.stockout_units = 0

    def update(self, outcome):
        ns = outcome.next_state
        self.steps += 1
        self.total_reward += outcome.reward
        self.sum_inv_factory += ns.inv_factory
        self.sum_inv_warehouse += ns.inv_warehouse
        self.sum_rp += ns.rp
        self.stockout_units += outcome.stockout_units

    def to_metrics(self, episode, wall_time):
        n = max(1, self.steps)
        return RunMetrics(
            episode=episode,
            total_reward=self.total_reward,
            mean_inv_factory=self.sum_inv_factory / n,
            mean_inv_warehouse=self.sum_inv_warehouse / n,
            mean_rp=self.sum_rp / n,
            stockout_units=self.stockout_units,
            wall_time=wall_time,
        )


def compute_ci(samples, level=0.95, use_t=False):
    """Confidence interval mean +/- q * s / sqrt(n) with the n-1 std.

    The default multiplier is the normal quantile (1.96 at 95%); pass
    ``use_t=True`` for a Student-t quantile instead (needs scipy).
    """
    values = [float(v) for v in samples]
    n = len(values)
    if n < 2:
        raise ValueError(f"need at least 2 samples for a confidence interval, got {n}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    if use_t:
        from scipy.stats import t as student_t

        q = float(student_t.ppf(0.5 + level / 2.0, df=n - 1))
    elif level == 0.95:
        q = 1.96
    else:
        q = NormalDist().inv_cdf(0.5 + level / 2.0)
    half = q * math.sqrt(var) / math.sqrt(n)
    return (mean - half, mean + half)


def moving_average(values, window=10):
    """Trailing mean over ``window`` values; the warm-up uses the prefix."""
    if window < 1:
        raise ValueError(f"window={window} must be >= 1")
    out = []
    acc = 0.0
    values = list(values)
    for i, v in enumerate(values):
        acc += v
        if i >= window:
            acc -= values[i - window]
        out.append(acc / min(window, i + 1))
    return out


def plateau_episode(smoothed, tolerance=0.10):
    """First index after which the sequence stays near its final value.

    "Near" means within ``tolerance * |final|`` of the final entry; a
    constant sequence plateaus at 0.
    """
    values = list(smoothed)
    if not values:
        raise ValueError("empty reward sequence")
    final = values[-1]
    band = tolerance * abs(final)
    idx = 0
    for i in range(len(values) - 1, -1, -1):
        if abs(values[i] - final) > band:
            idx = i + 1
            break
    return idx


def measure_execution_time(metrics):
    """Mean wall seconds per episode, excluding the warm-up first episode."""
    if len(metrics) < 5:
        raise ValueError(f"need at least 5 episodes to time a run, got {len(metrics)}")
    times = [m.wall_time for m in metrics[1:]]
    return sum(times) / len(times)
