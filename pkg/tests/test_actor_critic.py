import numpy as np
import pytest

from safestock.actor_critic import (
    Transition,
    a2c_step,
    evaluate_a2c,
    joint_obs,
    load_a2c_agent,
    make_a2c_agent,
    save_a2c_agent,
    td_advantage,
    train_a2c,
)
from safestock.env import ChainConfig, EnvState, new_env
from safestock.nets import GaussianPolicy, Mlp, forward, gaussian_logprob_grad

CFG = ChainConfig.for_case(1)


def zeroed_agent(seed=0, std=2.0):
    agent = make_a2c_agent(CFG, seed, action_std=std)
    agent.theta[:] = 0.0
    return agent


class TestTdAdvantage:
    def test_zero_critic_returns_reward(self):
        agent = zeroed_agent()
        s = np.array([0.1, 0.2, 0.3])
        assert td_advantage(agent.critic, -0.75, s, s, 0.2) == pytest.approx(-0.75)

    def test_direct_substitution(self):
        # identity critic on a single input: V([x]) = x
        critic = Mlp((1, 1), weights=[np.array([[1.0]])], biases=[np.zeros(1)])
        delta = td_advantage(critic, -65.0, np.array([-80.0]), np.array([-100.0]), 0.2)
        assert delta == pytest.approx(-5.0)

    def test_deterministic(self):
        agent = make_a2c_agent(CFG, 3)
        s = np.array([0.5, 0.1, 0.2])
        s2 = np.array([0.4, 0.2, 0.1])
        assert td_advantage(agent.critic, -0.1, s, s2, 0.2) == \
            td_advantage(agent.critic, -0.1, s, s2, 0.2)


class TestA2cStep:
    def test_zero_delta_leaves_parameters_untouched(self):
        agent = zeroed_agent()
        s = np.array([0.2, 0.2, 0.1])
        tr = Transition(s, np.zeros(3), 0.0, s)   # V=0, r=0 -> delta=0, a=mu
        before = agent.theta.copy()
        a2c_step(agent, tr)
        assert np.array_equal(agent.theta, before)

    def test_positive_delta_raises_logprob_of_action(self):
        agent = make_a2c_agent(CFG, 7)
        s = np.array([0.1, 0.4, 0.2])
        a = forward(agent.actor.mean_net, s) + np.array([0.9, -0.7, 0.4])
        lp_before, _ = gaussian_logprob_grad(agent.actor, s, a)
        # rig a strongly positive TD error via a large scaled reward
        v_s = float(forward(agent.critic, s)[0])
        v_n = float(forward(agent.critic, s)[0])
        r = 5.0 + v_s - agent.gamma * v_n
        a2c_step(agent, Transition(s, a, r, s))
        lp_after, _ = gaussian_logprob_grad(agent.actor, s, a)
        assert lp_after > lp_before

    def test_negative_delta_lowers_overestimated_value(self):
        agent = make_a2c_agent(CFG, 9)
        s = np.array([0.3, 0.1, 0.1])
        v_before = float(forward(agent.critic, s)[0])
        # target r + gamma V(s') far below V(s) -> delta < 0
        target_gap = -4.0
        v_n = float(forward(agent.critic, s)[0])
        r = v_before + target_gap - agent.gamma * v_n
        a2c_step(agent, Transition(s, forward(agent.actor.mean_net, s), r, s))
        v_after = float(forward(agent.critic, s)[0])
        assert v_after < v_before


class TestTraining:
    def test_zero_episodes(self):
        env = new_env(CFG, 1)
        agent = make_a2c_agent(CFG, 1)
        assert train_a2c(env, agent, 0, 50) == []

    def test_seeded_reproducibility(self):
        results = []
        for _ in range(2):
            env = new_env(CFG, 11)
            agent = make_a2c_agent(CFG, 12)
            metrics = train_a2c(env, agent, 4, 30, rng=np.random.default_rng(13))
            evals = evaluate_a2c(env, agent, 2, 30)
            results.append([
                (m.total_reward, m.mean_inv_factory, m.mean_inv_warehouse,
                 m.mean_rp, m.stockout_units) for m in metrics + evals])
        assert results[0] == results[1]

    def test_parameters_stay_finite(self):
        env = new_env(CFG, 21)
        agent = make_a2c_agent(CFG, 22)
        train_a2c(env, agent, 12, 60, rng=np.random.default_rng(23))
        assert np.all(np.isfinite(agent.theta))

    def test_env_only_sees_clipped_integer_actions(self):
        env = new_env(CFG, 31)
        seen = []
        original = env.step

        def recording_step(action):
            seen.append(action)
            return original(action)

        env.step = recording_step
        agent = make_a2c_agent(CFG, 32)
        train_a2c(env, agent, 2, 40, rng=np.random.default_rng(33))
        assert len(seen) == 80
        for action in seen:
            assert isinstance(action.q_factory, int)
            assert 0 <= action.q_warehouse <= 30
            assert 0 <= action.rp_next <= 6

    def test_evaluation_is_mean_action_and_pure(self):
        env_a = new_env(CFG, 41)
        env_b = new_env(CFG, 41)
        agent = make_a2c_agent(CFG, 42)
        theta_before = agent.theta.copy()
        ev_a = evaluate_a2c(env_a, agent, 3, 25)
        ev_b = evaluate_a2c(env_b, agent, 3, 25)
        assert [m.total_reward for m in ev_a] == [m.total_reward for m in ev_b]
        assert np.array_equal(agent.theta, theta_before)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        agent = make_a2c_agent(CFG, 5, action_std=1.5)
        path = tmp_path / "agent.txt"
        save_a2c_agent(agent, path, case=2)
        clone, case = load_a2c_agent(path)
        assert case == 2
        assert clone.actor.action_std == 1.5
        assert clone.gamma == agent.gamma
        s = np.array([0.2, 0.5, 0.1])
        assert np.array_equal(forward(clone.critic, s),
                              forward(agent.critic, s))
        assert np.array_equal(forward(clone.actor.mean_net, s),
                              forward(agent.actor.mean_net, s))

    def test_wrong_algo_rejected(self, tmp_path):
        path = tmp_path / "agent.txt"
        with open(path, "w") as fh:
            fh.write("safestock-agent 1\nalgo maa2c\ncase 1\ngamma 0.2\n"
                     "action_std 2.0\nobs_scale 0.1\nreward_scale 0.0001\n")
        with pytest.raises(ValueError, match="a2c"):
            load_a2c_agent(path)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not an agent\n")
        with pytest.raises(ValueError, match="agent"):
            load_a2c_agent(path)
