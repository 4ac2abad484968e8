"""TD advantage actor-critic over the joint chain state.

One critic scores the joint state (inv_factory, inv_warehouse, rp); one
Gaussian actor emits the joint action mean (q_factory, q_warehouse,
rp_next).  Updates are online, one transition at a time: the TD error
delta = r + gamma V(s') - V(s) drives both the critic (toward the
bootstrapped target) and the actor (along delta * grad log pi).  The raw
Gaussian sample keeps the gradient honest; the clipped integer action is
what the environment executes.
"""

import time
from typing import NamedTuple

import numpy as np

from .env import clip_action
from .metrics import EpisodeStats
from .nets import (
    AdamState,
    GaussianPolicy,
    Mlp,
    adam_step,
    backward,
    forward,
    forward_cached,
    logprob_grad_from_mean,
    read_mlp,
    std_from_text,
    std_to_text,
    write_mlp,
)

HIDDEN_LAYERS = (100, 100, 100)
REWARD_SCALE = 1e-4   # rewards reach -1e4 * items; keep critic targets near unity


class Transition(NamedTuple):
    s: np.ndarray        # scaled joint state
    a: np.ndarray        # raw (pre-clip) sampled action
    r: float             # scaled reward
    s_next: np.ndarray   # scaled next joint state


class A2cAgent:
    """Critic and actor share one flat parameter vector and one Adam state.

    Adam is elementwise, so the shared buffer updates exactly as two
    separate optimizers would.
    """

    def __init__(self, critic, actor, gamma, obs_scale,
                 reward_scale=REWARD_SCALE, alpha=0.001):
        n_critic = critic.theta.size
        self.theta = np.concatenate([critic.theta, actor.mean_net.theta])
        self.critic = Mlp(critic.layer_sizes, theta=self.theta[:n_critic])
        self.actor = GaussianPolicy(
            Mlp(actor.mean_net.layer_sizes, theta=self.theta[n_critic:]),
            actor.action_std)
        self.gamma = gamma
        self.obs_scale = obs_scale
        self.reward_scale = reward_scale
        self.opt = AdamState(self.theta, alpha=alpha)
        self._grad = np.zeros_like(self.theta)


def make_a2c_agent(config, seed, action_std=2.0, gamma=0.2, alpha=0.001,
                   hidden=HIDDEN_LAYERS):
    rng = np.random.default_rng(seed)
    critic = Mlp((3, *hidden, 1), rng=rng)
    actor = GaussianPolicy(Mlp((3, *hidden, 3), rng=rng), action_std)
    return A2cAgent(critic, actor, gamma, 1.0 / config.capacity, alpha=alpha)


def joint_obs(state, scale):
    return np.array(
        [state.inv_factory, state.inv_warehouse, state.rp], dtype=float) * scale


def td_advantage(critic, r_scaled, s, s_next, gamma):
    """One-step TD error r + gamma V(s') - V(s)."""
    return float(r_scaled + gamma * forward(critic, s_next)[0]
                 - forward(critic, s)[0])


def a2c_step(agent, transition, actor_cache=None):
    """Apply one online critic + actor update and return the agent.

    ``actor_cache`` may carry the forward cache from sampling time (the
    actor is unchanged in between, so the cached activations are current).
    """
    v_s, critic_cache = forward_cached(agent.critic, transition.s)
    v_next = forward(agent.critic, transition.s_next)
    delta = transition.r + agent.gamma * float(v_next[0]) - float(v_s[0])

    # ascent along delta * grad; Adam applies descent, so negate
    grad = agent._grad
    n_critic = agent.critic.theta.size
    backward(agent.critic, transition.s, np.array([-delta]), critic_cache,
             out=grad[:n_critic])
    mean_net = agent.actor.mean_net
    if actor_cache is None:
        _, actor_cache = forward_cached(mean_net, transition.s)
    mu = actor_cache[1][-1]
    _, dmu = logprob_grad_from_mean(mu, transition.a, agent.actor.action_std)
    backward(mean_net, transition.s, -delta * dmu, actor_cache,
             out=grad[n_critic:])
    adam_step(agent.theta, grad, agent.opt)
    return agent


def train_a2c(env, agent, episodes, steps_per_episode, rng=None):
    """Online training; actions are sampled, clipped for the env, raw for grads."""
    if steps_per_episode < 1:
        raise ValueError("steps_per_episode must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    std = agent.actor.action_std
    history = []
    for episode in range(episodes):
        tic = time.perf_counter()
        state = env.reset()
        incoming = 0
        s_vec = joint_obs(state, agent.obs_scale)
        stats = EpisodeStats()
        for _ in range(steps_per_episode):
            mu, cache = forward_cached(agent.actor.mean_net, s_vec)
            a_raw = mu + std * rng.standard_normal(3)
            action = clip_action(state, a_raw, incoming, env.config)
            outcome = env.step(action)
            s_next = joint_obs(outcome.next_state, agent.obs_scale)
            a2c_step(agent, Transition(
                s_vec, a_raw, outcome.reward * agent.reward_scale, s_next),
                actor_cache=cache)
            stats.update(outcome)
            state = outcome.next_state
            incoming = outcome.incoming.to_warehouse
            s_vec = s_next
        history.append(stats.to_metrics(episode, time.perf_counter() - tic))
    return history


def evaluate_a2c(env, agent, episodes, steps_per_episode):
    """Mean-action rollouts with the frozen actor; the critic stays unused."""
    history = []
    for episode in range(episodes):
        tic = time.perf_counter()
        state = env.reset()
        incoming = 0
        stats = EpisodeStats()
        for _ in range(steps_per_episode):
            mu = forward(agent.actor.mean_net, joint_obs(state, agent.obs_scale))
            action = clip_action(state, mu, incoming, env.config)
            outcome = env.step(action)
            stats.update(outcome)
            state = outcome.next_state
            incoming = outcome.incoming.to_warehouse
        history.append(stats.to_metrics(episode, time.perf_counter() - tic))
    return history


def save_a2c_agent(agent, path, case):
    with open(path, "w", newline="\n") as fh:
        fh.write("safestock-agent 1\n")
        fh.write("algo a2c\n")
        fh.write(f"case {case}\n")
        fh.write(f"gamma {agent.gamma!r}\n")
        fh.write(f"action_std {std_to_text(agent.actor.action_std)}\n")
        fh.write(f"obs_scale {agent.obs_scale!r}\n")
        fh.write(f"reward_scale {agent.reward_scale!r}\n")
        write_mlp(fh, agent.critic)
        write_mlp(fh, agent.actor.mean_net)


def read_agent_header(fh):
    magic = fh.readline().split()
    if magic[:1] != ["safestock-agent"]:
        raise ValueError("not a safestock agent file")
    fields = {}
    for _ in range(6):
        key, value = fh.readline().split()
        fields[key] = value
    return fields


def load_a2c_agent(path):
    """Load an agent saved by save_a2c_agent; returns (agent, case)."""
    with open(path) as fh:
        fields = read_agent_header(fh)
        if fields["algo"] != "a2c":
            raise ValueError(f"expected an a2c agent, found {fields['algo']!r}")
        critic = read_mlp(fh)
        mean_net = read_mlp(fh)
    actor = GaussianPolicy(mean_net, std_from_text(fields["action_std"]))
    agent = A2cAgent(critic, actor, float(fields["gamma"]),
                     float(fields["obs_scale"]), float(fields["reward_scale"]))
    return agent, int(fields["case"])
