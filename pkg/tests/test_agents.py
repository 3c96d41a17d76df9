import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlsurv import nn
from rlsurv.agents import (Agent, AgentConfig, compute_targets_ddqn, compute_targets_dqn,
                           epsilon_at, train)
from rlsurv.dataset import Dataset
from rlsurv.env import ClassificationEnv, EnvConfig
from rlsurv.errors import InvalidArgument
from rlsurv.replay import Batch, Transition

SMALL = (4, 16, 8, 2)


def small_agent(**kw):
    kw.setdefault("layer_sizes", SMALL)
    return Agent(AgentConfig(**kw))


def two_clusters(n=200, seed=0):
    """Linearly separable: class is the side of the plane sum(x) = 0."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    x = rng.normal(scale=0.15, size=(n, 4)) + np.where(y[:, None] == 1, 0.5, -0.5)
    assert np.array_equal((x.sum(axis=1) > 0).astype(int), y)  # brute-force separability check
    return Dataset(x, y, "toy")


def random_batch(rng, n=16, terminal_rate=0.2):
    return Batch(rng.normal(size=(n, 4)), rng.integers(0, 2, n), rng.normal(size=n),
                 rng.normal(size=(n, 4)), rng.uniform(size=n) < terminal_rate)


# -- config and schedule ----------------------------------------------------

def test_epsilon_schedule():
    cfg = AgentConfig(total_steps=60_000)
    assert epsilon_at(cfg, 0) == 1.0
    assert epsilon_at(cfg, 15_000) == pytest.approx(0.75)
    assert epsilon_at(cfg, 30_000) == 0.5
    assert epsilon_at(cfg, 59_999) == 0.5


def test_exponential_schedule_endpoints():
    cfg = AgentConfig(total_steps=100, epsilon_schedule="exponential")
    assert epsilon_at(cfg, 0) == 1.0
    assert epsilon_at(cfg, 25) == pytest.approx(0.5 ** 0.5)
    assert epsilon_at(cfg, 50) == 0.5


@pytest.mark.parametrize("kw", [dict(algorithm="a2c"), dict(gamma=1.5), dict(epsilon_end=1.2),
                                dict(batch_size=0), dict(layer_sizes=(4, 8, 3)), dict(loss="l1")])
def test_config_validation(kw):
    with pytest.raises(InvalidArgument):
        AgentConfig(**kw)


def test_config_dict_round_trip():
    cfg = AgentConfig(algorithm="dqn", total_steps=10, layer_sizes=(4, 8, 2))
    assert AgentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidArgument, match="lr"):
        AgentConfig.from_dict({"lr": 0.1})


# -- acting -----------------------------------------------------------------

def constant_output(net, q):
    """Zero every weight so the net outputs ``q`` for any input."""
    net.params[...] = 0.0
    net.biases[-1][...] = q


def net_with_output_bias(agent, q):
    constant_output(agent.q_net, q)


def test_greedy_and_tie_break():
    agent = small_agent()
    net_with_output_bias(agent, [0.2, 0.9])
    assert agent.select_action(np.zeros(4), 0.0) == 1
    net_with_output_bias(agent, [0.5, 0.5])
    assert agent.select_action(np.zeros(4), 0.0) == 0
    assert agent.predict(np.zeros((3, 4))).tolist() == [0, 0, 0]


def test_random_actions_are_fair():
    agent = small_agent(seed=3)
    draws = [agent.select_action(np.zeros(4), 1.0) for _ in range(10_000)]
    assert 0.47 <= np.mean(draws) <= 0.53


def test_predict_batch_equals_rows():
    agent = small_agent(seed=1)
    x = np.random.default_rng(0).normal(size=(20, 4))
    assert agent.predict(x).tolist() == [int(agent.predict(r[None])[0]) for r in x]


# -- targets ----------------------------------------------------------------

def test_gamma_zero_targets_are_rewards():
    for algo, fn in (("dqn", compute_targets_dqn), ("ddqn", compute_targets_ddqn)):
        agent = small_agent(algorithm=algo)
        batch = [Transition((0.0,) * 4, a, r, (1.0,) * 4) for a, r in ((0, -1.0), (1, 1.0), (1, 198.1))]
        assert fn(agent, batch).tolist() == [-1.0, 1.0, 198.1]


def test_dqn_target_hand_value():
    agent = small_agent(gamma=0.9)
    constant_output(agent.target_net, [0.5, 2.0])
    batch = [Transition((0.0,) * 4, 0, 1.0, (0.0,) * 4)]
    assert compute_targets_dqn(agent, batch)[0] == pytest.approx(2.8)


def test_terminal_target_is_reward():
    agent = small_agent(gamma=0.9, seed=2)
    batch = [Transition((0.0,) * 4, 1, 0.3, (5.0,) * 4, terminal=True)]
    assert compute_targets_dqn(agent, batch)[0] == 0.3
    assert compute_targets_ddqn(agent, batch)[0] == 0.3


def test_ddqn_decouples_selection_from_evaluation():
    agent = small_agent(gamma=1.0)
    constant_output(agent.q_net, [1.0, 3.0])
    constant_output(agent.target_net, [5.0, 0.5])
    batch = [Transition((0.0,) * 4, 0, 0.0, (0.0,) * 4)]
    assert compute_targets_ddqn(agent, batch)[0] == 0.5
    assert compute_targets_dqn(agent, batch)[0] == 5.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(0.0, 1.0))
def test_ddqn_never_exceeds_dqn(seed, gamma):
    rng = np.random.default_rng(seed)
    agent = small_agent(gamma=gamma, seed=seed % 1000)
    agent.q_net.params += rng.normal(scale=0.5, size=agent.q_net.params.size)
    batch = random_batch(rng)
    assert np.all(compute_targets_ddqn(agent, batch) <= compute_targets_dqn(agent, batch))


def test_shared_weights_make_algorithms_agree():
    rng = np.random.default_rng(5)
    agent = small_agent(gamma=0.7, seed=5)
    agent.q_net.params += rng.normal(size=agent.q_net.params.size)
    agent.sync_target()
    batch = random_batch(rng, 64)
    assert np.array_equal(compute_targets_ddqn(agent, batch), compute_targets_dqn(agent, batch))


# -- training step ----------------------------------------------------------

def toy_env(seed=0):
    return ClassificationEnv(two_clusters(40, seed), EnvConfig(seed=seed))


def test_no_update_during_warm_up():
    agent = small_agent(batch_size=32)
    env = toy_env()
    before = agent.q_net.params.copy()
    for _ in range(31):
        assert agent.train_step(env).loss is None
    assert np.array_equal(agent.q_net.params, before)
    assert agent.train_step(env).loss is not None
    assert not np.array_equal(agent.q_net.params, before)


def test_target_frozen_between_syncs_and_exact_at_sync():
    agent = small_agent(target_sync_period=800, seed=4)
    env = toy_env()
    frozen = agent.target_net.params.copy()
    for _ in range(799):
        agent.train_step(env)
        assert np.array_equal(agent.target_net.params, frozen)
    agent.train_step(env)
    assert agent.step_count == 800
    x = np.random.default_rng(1).normal(size=(100, 4))
    assert np.array_equal(nn.forward(agent.q_net, x), nn.forward(agent.target_net, x))


def test_untaken_action_gets_no_gradient(monkeypatch):
    agent = small_agent(seed=6)
    rng = np.random.default_rng(6)
    batch = random_batch(rng, 32)
    seen = {}
    real_backward = nn.backward

    def spy(net, states, output_grads, trace=None):
        seen["g"] = np.array(output_grads)
        return real_backward(net, states, output_grads, trace)

    monkeypatch.setattr(nn, "backward", spy)
    agent.learn(batch)
    g = seen["g"]
    untaken = g[np.arange(32), 1 - batch.actions]
    assert not untaken.any()
    assert g[np.arange(32), batch.actions].any()


# -- full training ----------------------------------------------------------

def test_zero_steps_returns_fresh_agent():
    cfg = AgentConfig(total_steps=0, layer_sizes=SMALL, seed=3)
    res = train(cfg, two_clusters())
    assert np.array_equal(res.agent.q_net.params, Agent(cfg).q_net.params)
    assert res.curve == []


def test_single_class_rejected():
    ds = Dataset(np.zeros((5, 4)), [0] * 5)
    with pytest.raises(InvalidArgument, match="both classes"):
        train(AgentConfig(total_steps=10), ds)


def test_training_is_deterministic():
    cfg = AgentConfig(total_steps=1_500, eval_interval=500, layer_sizes=SMALL, seed=9)
    data = two_clusters()
    a = train(cfg, data, data)
    b = train(cfg, data, data)
    assert np.array_equal(a.agent.q_net.params, b.agent.q_net.params)
    assert a.curve == b.curve
    assert [s for s, _, _ in a.curve] == [500, 1000, 1500]


@pytest.mark.parametrize("algorithm", ["dqn", "ddqn"])
def test_learns_separable_toy(algorithm):
    data = two_clusters()
    cfg = AgentConfig(algorithm=algorithm, total_steps=4_000, eval_interval=1_000, seed=0)
    res = train(cfg, data, data)
    acc = np.mean(res.agent.predict(data.features) == data.labels)
    assert acc >= 0.95
    assert res.best_val_f1 == max(f for _, f, _ in res.curve)


def test_checkpoint_round_trip():
    cfg = AgentConfig(total_steps=300, layer_sizes=SMALL, seed=1)
    agent = train(cfg, two_clusters()).agent
    back = Agent.from_dict(agent.to_dict())
    x = np.random.default_rng(0).normal(size=(50, 4))
    assert np.array_equal(back.q_values(x), agent.q_values(x))
    assert back.config == agent.config


def test_device1_regression_fixture():
    """Desk-scale DDQN on Device-1 at 80:20; validation F1 of the returned snapshot, 5 seeds."""
    from rlsurv import dataset as D
    ds = D.generate(D.preset("device1"))
    scores = []
    for seed in range(5):
        parts = D.split(ds, 0.2, seed=seed)
        scaler = D.fit_scaler(parts.train)
        train_set, val_set = D.apply_scaler(scaler, parts.train), D.apply_scaler(scaler, parts.val)
        scores.append(train(AgentConfig(seed=seed), train_set, val_set).best_val_f1)
    assert min(scores) >= 0.6, scores
