"""Tabular Q-learning over the joint chain state.

The state is the integer triple (inv_factory, inv_warehouse, rp) and the
action the integer triple (q_factory, q_warehouse, rp_next) restricted to
the constraint-filtered feasible box.  Unvisited entries default to zero,
which is optimistic since every reward is <= 0.  Value arrays are allocated
lazily per visited state so the table stays far below the dense
state x action product.
"""

import time
from dataclasses import dataclass

import numpy as np

from .env import ActionVector, feasible_bounds
from .metrics import EpisodeStats

_INDEX_CACHE = {}

# Order-quantity rungs the planner considers (intersected with the clip
# box; the box's own lower bound is always included).  The full unit box
# holds ~2800 joint actions per state, far more than a zero-initialised
# table can ever exhaust within the training budget, so the planner
# searches this coarser ladder instead; clipping still allows any integer.
QUANTITY_RUNGS = (0, 5, 10, 15)


@dataclass(frozen=True)
class QHyper:
    alpha: float = 0.8
    gamma: float = 0.2
    epsilon: float = 0.5

    def __post_init__(self):
        for name in ("alpha", "gamma", "epsilon"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name}={v} must lie in (0, 1]")


def state_key(state):
    return (state.inv_factory, state.inv_warehouse, state.rp)


def _ladder(lo, hi, rungs):
    values = [lo]
    for q in rungs:
        if lo < q <= hi:
            values.append(q)
    return values


class FeasibleActions:
    """Candidate integer actions for a state, in flat index order.

    Flat indices follow C order over (q_factory, q_warehouse, rp_next), so
    position 0 is the lexicographically smallest candidate.  ``rungs=None``
    enumerates the complete clip box instead of the planner's ladder.
    """

    __slots__ = ("flat", "n_w", "n_rp")

    def __init__(self, flat, n_w, n_rp):
        self.flat = flat
        self.n_w = n_w
        self.n_rp = n_rp

    @classmethod
    def from_state(cls, state, incoming_order, config, rungs=QUANTITY_RUNGS):
        cap = config.capacity
        n_rp = config.rp_max + 1
        lo_w, hi_w, hi_f = feasible_bounds(state, incoming_order, config)
        lo_w = min(lo_w, cap)
        hi_w = max(hi_w, lo_w)
        key = (state.inv_factory, lo_w, hi_w, cap,
               config.rp_min, config.rp_max, rungs)
        flat = _INDEX_CACHE.get(key)
        if flat is None:
            if rungs is None:
                q_f = np.arange(cap + 1)[:, None]
                q_w = np.arange(cap + 1)[None, :]
                ok = (
                    (q_w >= lo_w) & (q_w <= hi_w)
                    & (q_f >= np.maximum(0, q_w - state.inv_factory))
                    & (q_f <= hi_f)
                )
                pairs = np.flatnonzero(ok)
            else:
                pair_list = []
                for q_w in _ladder(lo_w, hi_w, rungs):
                    lo_f = max(0, q_w - state.inv_factory)
                    for q_f in _ladder(lo_f, hi_f, rungs):
                        pair_list.append(q_f * (cap + 1) + q_w)
                pairs = np.array(sorted(set(pair_list)), dtype=np.int64)
            rp_values = np.arange(config.rp_min, config.rp_max + 1)
            flat = (pairs[:, None] * n_rp + rp_values[None, :]).ravel()
            flat.setflags(write=False)
            _INDEX_CACHE[key] = flat
        return cls(flat, cap + 1, n_rp)

    @property
    def size(self):
        return len(self.flat)

    def action_at(self, position):
        idx = int(self.flat[position])
        rp = idx % self.n_rp
        idx //= self.n_rp
        return (idx // self.n_w, idx % self.n_w, rp)


class QTable:
    """Sparse state map onto lazily allocated dense action-value arrays."""

    def __init__(self, capacity=30, rp_max=6, rp_min=0):
        self.capacity = capacity
        self.rp_min = rp_min
        self.rp_max = rp_max
        self.shape = (capacity + 1, capacity + 1, rp_max + 1)
        self._values = {}

    def __len__(self):
        return len(self._values)

    def peek(self, state):
        """Flat value array for ``state`` or None if never written."""
        arr = self._values.get(state)
        return None if arr is None else arr.ravel()

    def get(self, state, action):
        arr = self._values.get(state)
        return 0.0 if arr is None else float(arr[action])

    def set(self, state, action, value):
        arr = self._values.get(state)
        if arr is None:
            if not all(0 <= s <= self.capacity for s in state[:2]):
                raise ValueError(f"state {state} outside inventory bounds")
            arr = np.zeros(self.shape)
            self._values[state] = arr
        arr[action] = value

    @property
    def nbytes(self):
        return sum(a.nbytes for a in self._values.values())

    def items_sorted(self):
        """Nonzero (state, action, value) triples in sorted order."""
        for state in sorted(self._values):
            arr = self._values[state]
            for flat in np.flatnonzero(arr.ravel()):
                action = np.unravel_index(flat, self.shape)
                yield state, tuple(int(i) for i in action), float(arr[action])


def select_action(table, state, feasible, hyper, rng):
    """Epsilon-greedy draw over the feasible set, greedy ties to lowest index."""
    if feasible.size == 0:
        raise ValueError(f"empty feasible action set in state {state}")
    if rng.random() < hyper.epsilon:
        return feasible.action_at(int(rng.integers(feasible.size)))
    return greedy_action(table, state, feasible)


def greedy_action(table, state, feasible):
    """Argmax of Q over the feasible set; unseen entries count as zero."""
    if feasible.size == 0:
        raise ValueError(f"empty feasible action set in state {state}")
    values = table.peek(state)
    if values is None:
        return feasible.action_at(0)
    return feasible.action_at(int(np.argmax(values[feasible.flat])))


def q_update(table, s, a, r, s_next, feasible_next, hyper):
    """One off-policy backup; returns the new Q(s, a)."""
    q = table.get(s, a)
    values = table.peek(s_next)
    best_next = 0.0 if values is None else float(values[feasible_next.flat].max())
    q_new = q + hyper.alpha * (r + hyper.gamma * best_next - q)
    table.set(s, a, q_new)
    return q_new


def train_q(env, hyper, episodes, steps_per_episode, rng=None, table=None):
    """Run the epsilon-greedy training loop; returns (table, metrics)."""
    if steps_per_episode < 1:
        raise ValueError("steps_per_episode must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    if table is None:
        table = QTable(env.config.capacity, env.config.rp_max, env.config.rp_min)
    history = []
    for episode in range(episodes):
        tic = time.perf_counter()
        state = env.reset()
        s = state_key(state)
        feasible = FeasibleActions.from_state(state, 0, env.config)
        stats = EpisodeStats()
        for _ in range(steps_per_episode):
            a = select_action(table, s, feasible, hyper, rng)
            outcome = env.step(ActionVector(*a))
            s_next = state_key(outcome.next_state)
            feasible_next = FeasibleActions.from_state(
                outcome.next_state, outcome.incoming.to_warehouse, env.config)
            q_update(table, s, a, outcome.reward, s_next, feasible_next, hyper)
            stats.update(outcome)
            s, feasible = s_next, feasible_next
        history.append(stats.to_metrics(episode, time.perf_counter() - tic))
    return table, history


def evaluate_q(env, table, episodes, steps_per_episode):
    """Greedy rollouts with the frozen table; no updates, no exploration."""
    history = []
    for episode in range(episodes):
        tic = time.perf_counter()
        state = env.reset()
        s = state_key(state)
        feasible = FeasibleActions.from_state(state, 0, env.config)
        stats = EpisodeStats()
        for _ in range(steps_per_episode):
            a = greedy_action(table, s, feasible)
            outcome = env.step(ActionVector(*a))
            s = state_key(outcome.next_state)
            feasible = FeasibleActions.from_state(
                outcome.next_state, outcome.incoming.to_warehouse, env.config)
            stats.update(outcome)
        history.append(stats.to_metrics(episode, time.perf_counter() - tic))
    return history


def export_table(table, fh):
    """Write the nonzero table entries as sorted plain-text triples."""
    fh.write("state_if state_iw state_rp q_factory q_warehouse rp_next value\n")
    for state, action, value in table.items_sorted():
        fh.write(" ".join(str(v) for v in (*state, *action)) + f" {value!r}\n")
