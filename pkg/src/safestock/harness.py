"""Experiment orchestration: multi-seed training runs, CSV metrics, summaries.

A run trains one algorithm on one cost case across several seeds, then
evaluates each trained policy greedily (tabular argmax or the actor mean).
Per-seed metrics land in CSV files; the summary recomputes everything from
those files so a later ``summarize`` pass reproduces it byte for byte.
Wall-clock times live in separate timing CSVs because the metrics files
must be byte-identical across reruns of the same configuration.
"""

import time
from dataclasses import dataclass, field, fields as dataclass_fields
from pathlib import Path

import numpy as np

from . import actor_critic, multi_agent, qlearning
from .env import ChainConfig, new_env
from .gsm import analytical_targets
from .metrics import RunMetrics, compute_ci, moving_average, plateau_episode
from .nets import forward

ALGORITHMS = ("q", "a2c", "maa2c")
DEFAULT_EPISODES = {"q": 3000, "a2c": 1000, "maa2c": 1000}
METRICS_HEADER = ("episode,phase,total_reward,mean_inv_factory,"
                  "mean_inv_warehouse,mean_rp,stockout_units")
EVAL_TAIL_FRACTION = 0.10   # trained behaviour only; transient excluded
SMOOTHING_WINDOW = 10


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one training comparison run."""

    algorithm: str
    case: int
    episodes: int | None = None
    steps_per_episode: int = 1000
    num_seeds: int = 10
    base_seed: int = 0
    eval_episodes: int = 50
    out_dir: str = ""
    action_std: float = 2.0
    q_alpha: float = 0.8
    q_gamma: float = 0.2
    q_epsilon: float = 0.5
    save_tables: bool = False
    env_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.case not in (1, 2):
            raise ValueError(f"unknown cost case {self.case!r}; expected 1 or 2")
        if self.episodes is None:
            self.episodes = DEFAULT_EPISODES[self.algorithm]
        if not self.out_dir:
            self.out_dir = f"runs/{self.algorithm}_case{self.case}"

    def chain_config(self):
        return ChainConfig.for_case(self.case, **self.env_overrides)


def _seed_streams(base_seed, k):
    """Decoupled env/agent seeds for run ``k``; deterministic in base_seed."""
    root = np.random.default_rng(base_seed + k)
    return int(root.integers(2 ** 63)), int(root.integers(2 ** 63))


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_metrics_csv(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(METRICS_HEADER + "\n")
        for phase, records in rows:
            for m in records:
                fh.write(",".join([
                    str(m.episode), phase, _fmt(m.total_reward),
                    _fmt(m.mean_inv_factory), _fmt(m.mean_inv_warehouse),
                    _fmt(m.mean_rp), str(m.stockout_units),
                ]) + "\n")


def _write_timing_csv(path, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write("episode,phase,wall_time\n")
        for phase, records in rows:
            for m in records:
                fh.write(f"{m.episode},{phase},{m.wall_time!r}\n")


def _read_metrics_csv(path):
    train, evals = [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != METRICS_HEADER:
            raise ValueError(f"unexpected metrics header in {path}: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            record = RunMetrics(
                episode=int(parts[0]),
                total_reward=float(parts[2]),
                mean_inv_factory=float(parts[3]),
                mean_inv_warehouse=float(parts[4]),
                mean_rp=float(parts[5]),
                stockout_units=int(parts[6]),
                wall_time=0.0,
            )
            (train if parts[1] == "train" else evals).append(record)
    return train, evals


def run_one_seed(config, k):
    """Train and evaluate a single seeded run; returns (train, eval, artifact).

    The artifact is the trained Q table or agent, ready for serialization.
    """
    env_seed, agent_seed = _seed_streams(config.base_seed, k)
    chain = config.chain_config()
    env = new_env(chain, env_seed)
    rng = np.random.default_rng(agent_seed)
    algo = config.algorithm
    if algo == "q":
        hyper = qlearning.QHyper(config.q_alpha, config.q_gamma, config.q_epsilon)
        table, train = qlearning.train_q(
            env, hyper, config.episodes, config.steps_per_episode, rng=rng)
        evals = qlearning.evaluate_q(
            env, table, config.eval_episodes, config.steps_per_episode)
        return train, evals, table
    if algo == "a2c":
        agent = actor_critic.make_a2c_agent(
            chain, agent_seed, action_std=config.action_std)
        train = actor_critic.train_a2c(
            env, agent, config.episodes, config.steps_per_episode, rng=rng)
        evals = actor_critic.evaluate_a2c(
            env, agent, config.eval_episodes, config.steps_per_episode)
        return train, evals, agent
    agent = multi_agent.make_maa2c_agent(
        chain, agent_seed, action_std=config.action_std)
    train = multi_agent.train_maa2c(
        env, agent, config.episodes, config.steps_per_episode, rng=rng)
    evals = multi_agent.evaluate_maa2c(
        env, agent, config.eval_episodes, config.steps_per_episode)
    return train, evals, agent


def _write_run_config(path, config):
    with open(path, "w", newline="\n") as fh:
        for f in dataclass_fields(config):
            value = getattr(config, f.name)
            if f.name == "env_overrides":
                for key, v in sorted(value.items()):
                    fh.write(f"env.{key} = {_fmt(v)}\n")
            else:
                fh.write(f"run.{f.name} = {_fmt(value)}\n")


def _run_and_write_seed(config, k):
    """Worker body: one seeded run plus its per-seed files (no shared state)."""
    tic = time.perf_counter()
    out = Path(config.out_dir)
    train, evals, artifact = run_one_seed(config, k)
    rows = [("train", train), ("eval", evals)]
    _write_metrics_csv(out / f"metrics_seed{k:02d}.csv", rows)
    _write_timing_csv(out / f"timing_seed{k:02d}.csv", rows)
    if config.algorithm == "a2c":
        actor_critic.save_a2c_agent(
            artifact, out / f"agent_seed{k:02d}.txt", config.case)
    elif config.algorithm == "maa2c":
        multi_agent.save_maa2c_agent(
            artifact, out / f"agent_seed{k:02d}.txt", config.case)
    elif config.save_tables:
        with open(out / f"qtable_seed{k:02d}.txt", "w", newline="\n") as fh:
            qlearning.export_table(artifact, fh)
    last = evals[-1]
    return (f"seed {k}: {time.perf_counter() - tic:.1f}s, "
            f"final eval inv f/w = {last.mean_inv_factory:.2f}/"
            f"{last.mean_inv_warehouse:.2f}")


def run_experiment(config, log=None, workers=1):
    """Train ``num_seeds`` independent runs, write CSVs, return the summary.

    Seeds are isolated (own env, own RNG streams, own output files), so
    ``workers > 1`` fans them out over processes without changing any
    result; the summary is computed in a single pass afterwards.
    """
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_run_config(out / "run_config.txt", config)
    if workers > 1 and config.num_seeds > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for line in pool.map(partial(_run_and_write_seed, config),
                                 range(config.num_seeds)):
                if log:
                    log(line)
    else:
        for k in range(config.num_seeds):
            line = _run_and_write_seed(config, k)
            if log:
                log(line)
    return summarize(out)


def eval_tail_means(eval_metrics):
    """Per-run evaluation means over the last 10% of evaluation episodes."""
    tail = eval_metrics[-max(1, round(EVAL_TAIL_FRACTION * len(eval_metrics))):]
    n = len(tail)
    return {
        "rp": sum(m.mean_rp for m in tail) / n,
        "inv_warehouse": sum(m.mean_inv_warehouse for m in tail) / n,
        "inv_factory": sum(m.mean_inv_factory for m in tail) / n,
        "stockout_units": sum(m.stockout_units for m in tail) / n,
        "total_reward": sum(m.total_reward for m in tail) / n,
    }


@dataclass
class Summary:
    algorithm: str
    case: int
    num_seeds: int
    rows: list          # (metric, mean, ci_low, ci_high)
    per_seed: dict      # metric -> list of per-seed values

    def row(self, metric):
        for name, mean, low, high in self.rows:
            if name == metric:
                return mean, low, high
        raise KeyError(metric)

    def to_csv_text(self):
        lines = ["metric,mean,ci_low,ci_high"]
        for name, mean, low, high in self.rows:
            lines.append(f"{name},{mean!r},{low!r},{high!r}")
        return "\n".join(lines) + "\n"

    def to_pretty_text(self):
        targets = dict(zip(("rp", "inv_factory", "inv_warehouse"),
                           analytical_targets(self.case)))
        lines = [
            f"algorithm: {self.algorithm}   case: {self.case}   "
            f"seeds: {self.num_seeds}",
            f"{'metric':<18} {'mean':>12} {'95% CI':>28} {'analytical':>11}",
        ]
        for name, mean, low, high in self.rows:
            target = targets.get(name)
            lines.append(
                f"{name:<18} {mean:>12.4f} {f'[{low:.4f}, {high:.4f}]':>28} "
                + (f"{target:>11}" if target is not None else f"{'-':>11}"))
        return "\n".join(lines) + "\n"


def summarize(out_dir, use_t=False, write=True):
    """Recompute the run summary from the per-seed CSV files."""
    out = Path(out_dir)
    run_config = _read_kv_file(out / "run_config.txt")
    algorithm = run_config.get("run.algorithm", "?")
    case = int(run_config.get("run.case", 1))
    seed_files = sorted(out.glob("metrics_seed*.csv"))
    if not seed_files:
        raise FileNotFoundError(f"no metrics_seed*.csv files in {out}")
    per_seed = {name: [] for name in
                ("rp", "inv_warehouse", "inv_factory", "stockout_units",
                 "total_reward", "plateau_episode")}
    for path in seed_files:
        train, evals = _read_metrics_csv(path)
        means = eval_tail_means(evals if evals else train)
        for name, value in means.items():
            per_seed[name].append(value)
        smoothed = moving_average(
            [m.total_reward for m in train], SMOOTHING_WINDOW)
        per_seed["plateau_episode"].append(float(plateau_episode(smoothed)))
    rows = []
    for name, values in per_seed.items():
        mean = sum(values) / len(values)
        if len(values) >= 2:
            low, high = compute_ci(values, use_t=use_t)
        else:
            low = high = mean
        rows.append((name, mean, low, high))
    summary = Summary(algorithm, case, len(seed_files), rows, per_seed)
    if write:
        with open(out / "summary.csv", "w", newline="\n") as fh:
            fh.write(summary.to_csv_text())
        with open(out / "summary.txt", "w", newline="\n") as fh:
            fh.write(summary.to_pretty_text())
        _write_timing_summary(out)
    return summary


def _write_timing_summary(out):
    rows = []
    for path in sorted(out.glob("timing_seed*.csv")):
        times = []
        with open(path) as fh:
            fh.readline()
            for line in fh:
                episode, phase, wall = line.rstrip("\n").split(",")
                if phase == "train":
                    times.append(float(wall))
        if len(times) >= 2:
            mean = sum(times[1:]) / len(times[1:])
            rows.append((path.stem.replace("timing_", ""), mean))
    with open(out / "timing_summary.csv", "w", newline="\n") as fh:
        fh.write("seed,mean_wall_time_per_train_episode\n")
        for seed, mean in rows:
            fh.write(f"{seed},{mean!r}\n")


GRID_HEADER = "inv_factory,inv_warehouse,value,factory_action_mean"


def export_policy_grid(agent_path, fixed_rp, out_dir):
    """Evaluate the saved agent's critic and factory actor over the
    (inv_factory, inv_warehouse) grid at a fixed reorder point; returns the
    CSV path.  The multi-agent factory actor sees (inventory, incoming
    order), so its order input is pinned at the configured mean order."""
    with open(agent_path) as fh:
        header = actor_critic.read_agent_header(fh)
    algo = header["algo"]
    if algo == "a2c":
        agent, case = actor_critic.load_a2c_agent(agent_path)
    elif algo == "maa2c":
        agent, case = multi_agent.load_maa2c_agent(agent_path)
    else:
        raise ValueError(f"agent type {algo!r} has no policy grid export")
    chain = ChainConfig.for_case(case)
    if not chain.rp_min <= fixed_rp <= chain.rp_max:
        raise ValueError(
            f"rp={fixed_rp} outside [{chain.rp_min}, {chain.rp_max}]")
    scale = agent.obs_scale
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"policy_value_grid_{algo}_case{case}_rp{fixed_rp}.csv"
    with open(path, "w", newline="\n") as fh:
        fh.write(GRID_HEADER + "\n")
        for inv_f in range(chain.capacity + 1):
            for inv_w in range(chain.capacity + 1):
                s = np.array([inv_f, inv_w, fixed_rp], dtype=float) * scale
                value = float(forward(agent.critic, s)[0])
                if algo == "a2c":
                    mean = float(forward(agent.actor.mean_net, s)[0])
                else:
                    local = np.array([inv_f, chain.order_mean]) * scale
                    mean = float(forward(agent.actors[0].mean_net, local)[0])
                fh.write(f"{inv_f},{inv_w},{value!r},{mean!r}\n")
    return path


def read_policy_grid(path):
    """Grid CSV back as a dict (inv_f, inv_w) -> (value, factory_mean)."""
    grid = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != GRID_HEADER:
            raise ValueError(f"unexpected grid header: {header!r}")
        for line in fh:
            f, w, v, m = line.rstrip("\n").split(",")
            grid[(int(f), int(w))] = (float(v), float(m))
    return grid


def bench(case, episodes=20, steps_per_episode=200, base_seed=0, log=None):
    """Per-episode training time of every algorithm on a matched config."""
    from .metrics import measure_execution_time

    results = {}
    for algo in ALGORITHMS:
        config = ExperimentConfig(
            algorithm=algo, case=case, episodes=episodes,
            steps_per_episode=steps_per_episode, num_seeds=1,
            base_seed=base_seed, eval_episodes=1, out_dir="unused")
        train, _, _ = run_one_seed(config, 0)
        results[algo] = measure_execution_time(train)
        if log:
            log(f"{algo}: {results[algo] * 1e3:.2f} ms/episode")
    return results


def _read_kv_file(path):
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


_ENV_FIELD_TYPES = {f.name: f.type for f in dataclass_fields(ChainConfig)}


def chain_overrides_from_mapping(values):
    """Pick the env.* keys out of a parsed key/value mapping."""
    overrides = {}
    for key, raw in values.items():
        if not key.startswith("env."):
            continue
        name = key[4:]
        if name == "case":
            continue
        if name not in _ENV_FIELD_TYPES:
            raise ValueError(f"unknown chain parameter {name!r}")
        caster = _ENV_FIELD_TYPES[name]
        caster = caster if caster in (int, float) else float
        overrides[name] = caster(raw)
    return overrides


def experiment_config_from_file(path, **cli_overrides):
    """Build an ExperimentConfig from a key/value file plus CLI overrides.

    File keys use section prefixes: env.* feeds the chain config, algo.*
    the hyperparameters, run.* the protocol.  Explicit CLI values win.
    """
    values = _read_kv_file(path) if path else {}
    kwargs = {}
    if "env.case" in values:
        kwargs["case"] = int(values["env.case"])
    run_keys = {
        "run.algorithm": ("algorithm", str),
        "run.case": ("case", int),
        "run.episodes": ("episodes", int),
        "run.steps_per_episode": ("steps_per_episode", int),
        "run.num_seeds": ("num_seeds", int),
        "run.base_seed": ("base_seed", int),
        "run.eval_episodes": ("eval_episodes", int),
        "run.out_dir": ("out_dir", str),
        "run.save_tables": ("save_tables", lambda v: v.lower() == "true"),
    }
    algo_keys = {
        "algo.alpha": ("q_alpha", float),
        "algo.gamma": ("q_gamma", float),
        "algo.epsilon": ("q_epsilon", float),
        "algo.action_std": ("action_std", float),
    }
    for key, (name, caster) in {**run_keys, **algo_keys}.items():
        if key in values:
            kwargs[name] = caster(values[key])
    kwargs["env_overrides"] = chain_overrides_from_mapping(values)
    for name, value in cli_overrides.items():
        if value is not None:
            kwargs[name] = value
    return ExperimentConfig(**kwargs)
