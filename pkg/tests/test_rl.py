import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradcheck import finite_difference, worst_mismatch
from uavoffload.gnn import ChainConfig, FeatureScales, ShapeError
from uavoffload.gnn.features import random_features
from uavoffload.rl import (Adam, DenseQNetwork, GnnQNetwork, GreedyQPolicy, OffloadEnv, RandomPolicy,
                           ReplayBuffer, ScheduledPolicy, TrainConfig, Transition, baseline_h_fc, baseline_h_rr,
                           hfc_policy, hrr_policy, make_network, select_actions, td_targets, train)
from uavoffload.rl.dqn import TrainingError, td_loss_and_grads, train_step
from uavoffload.scenario import ScenarioConfig

SMALL = ChainConfig(hidden=(8,), latent=4)
TINY_SCENARIO = ScenarioConfig(num_iot=4, num_uav=2, num_intervals=3)
SCALES = FeatureScales.from_config(ScenarioConfig())


# -- baselines ----------------------------------------------------------------

def test_h_fc_and_h_rr():
    assert baseline_h_fc(4).tolist() == [1, 1, 1, 1]
    assert baseline_h_rr(0, 3).tolist() == [1, 0, 0]
    assert baseline_h_rr(5, 3).tolist() == [0, 0, 1]
    for t in range(20):
        assert baseline_h_rr(t, 8).sum() == 1


def test_h_rr_energy_under_defaults():
    res = OffloadEnv(ScenarioConfig()).run(hrr_policy, seed=0)
    # 18 intervals over 8 UAV-Cs: two of them work three times
    assert res.schedule.sum(axis=0).max() == 3
    assert res.min_remaining == 100 - 36 - 9


def test_random_policy_seeded():
    obs = OffloadEnv(ScenarioConfig()).reset(seed=0)
    a = [RandomPolicy(3)(obs) for _ in range(2)]
    b = [RandomPolicy(3)(obs) for _ in range(2)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


# -- environment --------------------------------------------------------------

def test_env_step_and_done():
    env = OffloadEnv(TINY_SCENARIO)
    env.reset(seed=0)
    for t in range(3):
        res = env.step([1, 0])
        assert res.done == (t == 2)
    with pytest.raises(RuntimeError):
        env.step([1, 0])


def test_env_rejects_bad_action_and_tasks():
    env = OffloadEnv(TINY_SCENARIO)
    env.reset(seed=0)
    with pytest.raises(ValueError):
        env.step([1, 0, 1])
    from uavoffload.scenario import Task
    with pytest.raises(ValueError):
        env.reset([Task(9, 0, 1.0, 1.0, 1.0)])


def test_depleted_uav_forced_off():
    c = TINY_SCENARIO.replace(battery_capacity=6.0)
    env = OffloadEnv(c)
    env.reset(seed=0)
    env.step([1, 0])  # uav 0: 6 - 5 = 1
    env.step([1, 0])  # would go to -4: depleted
    assert env.depleted.tolist() == [True, False]
    res = env.step([1, 1])
    assert res.x.tolist() == [0, 1]


def test_run_replays_schedule_and_matches_objective():
    env = OffloadEnv(ScenarioConfig())
    sched = np.random.default_rng(0).integers(0, 2, size=(18, 8))
    res = env.run(ScheduledPolicy(sched), seed=2)
    assert np.array_equal(res.schedule, sched)
    expected = 0.5 / 100 * res.min_remaining - 0.5 / res.num_tasks * res.violations
    assert res.objective == pytest.approx(expected, abs=1e-12)
    assert res.violation_rate == res.violations / res.num_tasks


def test_reward_uses_pre_step_energies():
    env = OffloadEnv(TINY_SCENARIO)
    env.reset(seed=0)
    # both full: lowest is uav 0; switching it off scores severity 1
    assert env.step([0, 1]).severity == 1.0
    # now uav 1 is lower and on
    sev = env.step([0, 1]).severity
    assert sev == pytest.approx(-((100 - 95) / 100) ** 2)


def test_features_cached_per_interval():
    env = OffloadEnv(TINY_SCENARIO)
    obs = env.reset(seed=0)
    assert obs.features(SCALES) is env.features(SCALES)
    env.step([1, 1])
    assert env.observe().features(SCALES) is env.features(SCALES)
    with pytest.raises(RuntimeError):
        obs.features(SCALES)


# -- replay and exploration -----------------------------------------------------

def transition(rng, J=2, terminal=False, reward=0.0):
    s = random_features(rng, 3, J)
    return Transition(s, rng.integers(0, 2, size=J).astype(np.int8), reward, None if terminal else s, terminal)


def test_replay_ring_buffer(rng):
    buf = ReplayBuffer(3)
    items = [transition(rng, reward=float(k)) for k in range(5)]
    for it in items:
        buf.push(it)
    assert len(buf) == 3
    assert sorted(t.reward for t in buf.items) == [2.0, 3.0, 4.0]
    with pytest.raises(ValueError):
        buf.sample(4, rng)
    batch = buf.sample(3, rng)
    assert len({id(t) for t in batch}) == 3


def test_replay_sampling_is_uniform(rng):
    buf = ReplayBuffer(10)
    for k in range(10):
        buf.push(transition(rng, reward=float(k)))
    counts = np.zeros(10)
    for _ in range(3000):
        for t in buf.sample(2, rng):
            counts[int(t.reward)] += 1
    # each slot expected 600 times; 5 sigma band
    assert np.all(np.abs(counts - 600) < 5 * np.sqrt(600))


def test_transition_action_length_checked(rng):
    s = random_features(rng, 3, 2)
    with pytest.raises(ValueError):
        Transition(s, np.zeros(3, dtype=np.int8), 0.0, None, True)


def test_epsilon_extremes(rng):
    q = np.array([[0.0, 1.0], [2.0, 1.0], [0.0, 0.0]])
    assert select_actions(q, 0.0, rng).tolist() == [1, 0, 0]
    with pytest.raises(ValueError):
        select_actions(q, 1.5, rng)


def test_epsilon_random_rate(rng):
    q = np.tile([[1.0, 0.0]], (1000, 1))
    eps = 0.3
    flips = np.mean([select_actions(q, eps, rng).mean() for _ in range(20)])
    # a random bit is 1 half the time
    assert flips == pytest.approx(eps / 2, abs=0.01)


def test_schedules():
    tc = TrainConfig(episodes=100, epsilon_decay=0.9, lr_start=1e-3, lr_decay=0.5, lr_decay_every=0.25)
    assert tc.epsilon(0) == 1.0
    assert tc.epsilon(10) == pytest.approx(0.9**10)
    assert tc.epsilon(1000) == tc.epsilon_end
    assert [tc.learning_rate(e) for e in (0, 24, 25, 50, 99)] == [1e-3, 1e-3, 5e-4, 2.5e-4, 1.25e-4]
    with pytest.raises(ValueError):
        TrainConfig(batch_size=20, replay_capacity=10)


# -- targets, loss and optimizer -----------------------------------------------

class ConstNet:
    def __init__(self, q):
        self.q = q

    def forward_batch(self, states):
        return np.vstack([self.q[: s.num_uav] for s in states]), None


def test_td_targets_by_hand(rng):
    q = np.array([[1.0, 3.0], [-2.0, -5.0]])
    live = transition(rng, reward=0.5)
    done = transition(rng, reward=-1.0, terminal=True)
    out = td_targets([live, done], ConstNet(q), gamma=0.9)
    np.testing.assert_allclose(out[0], [0.5 + 0.9 * 3.0, 0.5 + 0.9 * -2.0])
    np.testing.assert_allclose(out[1], [-1.0, -1.0])
    with pytest.raises(ValueError):
        td_targets([], ConstNet(q), 0.9)


@pytest.mark.parametrize("kind", ["gnn", "dqn"])
def test_td_loss_gradient(rng, kind):
    if kind == "gnn":
        net = GnnQNetwork.init(SCALES, SMALL, seed=0)
    else:
        net = DenseQNetwork.init(3, 2, SCALES, hidden=(5,), seed=0)
    batch = [transition(rng) for _ in range(4)]
    targets = [rng.normal(size=2) for _ in batch]
    loss, grads = td_loss_and_grads(net, batch, targets)

    def f():
        net.bump()
        return td_loss_and_grads(net, batch, targets)[0]

    assert worst_mismatch(grads, finite_difference(f, net.params)) <= 1.0
    # the loss is the mean of squared errors on taken actions
    q = np.vstack([net.q_values(t.state) for t in batch])
    a = np.concatenate([t.action for t in batch])
    assert loss == pytest.approx(np.mean((q[np.arange(8), a] - np.concatenate(targets)) ** 2))


def test_adam_first_step_is_sign_times_lr():
    p = [np.array([1.0, -2.0, 0.5])]
    opt = Adam(p)
    opt.step(p, [np.array([0.3, -4.0, 0.0])], lr=0.1)
    np.testing.assert_allclose(p[0], [0.9, -1.9, 0.5], atol=1e-7)


def test_train_step_reduces_loss(rng):
    net = GnnQNetwork.init(SCALES, SMALL, seed=0)
    target = net.copy()
    batch = [transition(rng, reward=1.0) for _ in range(8)]
    opt = Adam(net.params)
    losses = [train_step(net, target, batch, 1e-2, opt, 0.5)[1] for _ in range(30)]
    assert losses[-1] < losses[0]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_train_step_rejects_non_finite(rng):
    net = GnnQNetwork.init(SCALES, SMALL, seed=0)
    batch = [transition(rng, reward=np.inf, terminal=True)]
    with pytest.raises(TrainingError):
        train_step(net, net.copy(), batch, 1e-3, Adam(net.params))


# -- networks -----------------------------------------------------------------

def test_dense_padding_and_shape_error(rng):
    net = DenseQNetwork.init(4, 3, SCALES, hidden=(6,), seed=0)
    small = random_features(rng, 4, 2)
    assert net.q_values(small).shape == (2, 2)
    assert net.flatten(small).shape == (DenseQNetwork.input_width(4, 3),)
    with pytest.raises(ShapeError):
        net.q_values(random_features(rng, 5, 3))
    with pytest.raises(ShapeError):
        net.q_values(random_features(rng, 4, 4))


def test_gnn_handles_any_size(rng):
    net = GnnQNetwork.init(SCALES, SMALL, seed=0)
    for i, j in [(1, 1), (30, 9), (96, 8)]:
        assert net.q_values(random_features(rng, i, j)).shape == (j, 2)


def test_greedy_ties_go_off():
    class Zero:
        scales = SCALES

        def q_values(self, feats):
            return np.zeros((feats.num_uav, 2))

    env = OffloadEnv(TINY_SCENARIO)
    assert GreedyQPolicy(Zero())(env.reset(seed=0)).tolist() == [0, 0]


# -- training loop ------------------------------------------------------------

def quick(**kw):
    base = dict(episodes=3, batch_size=4, replay_capacity=50, target_update_every=2, rng_seed=1)
    base.update(kw)
    return TrainConfig(**base)


@pytest.mark.parametrize("kind", ["gnn", "dqn"])
def test_training_is_deterministic(kind):
    a, log_a = train(TINY_SCENARIO, quick(), kind, SMALL)
    b, log_b = train(TINY_SCENARIO, quick(), kind, SMALL)
    assert all(np.array_equal(x, y) for x, y in zip(a.params, b.params))
    assert log_a.rows == log_b.rows
    assert len(log_a.rows) == 3


def test_zero_episodes_returns_initial_params():
    net, log = train(TINY_SCENARIO, quick(episodes=0), "gnn", SMALL)
    init = make_network("gnn", TINY_SCENARIO, 1, SMALL)
    assert all(np.array_equal(x, y) for x, y in zip(net.params, init.params))
    assert log.rows == []


def test_training_changes_params():
    net, _ = train(TINY_SCENARIO, quick(), "gnn", SMALL)
    init = make_network("gnn", TINY_SCENARIO, 1, SMALL)
    assert any(not np.array_equal(x, y) for x, y in zip(net.params, init.params))


def test_train_log_csv(tmp_path):
    _, log = train(TINY_SCENARIO, quick(), "gnn", SMALL)
    path = tmp_path / "log.csv"
    log.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "episode,total_reward,violations,min_remaining_energy,epsilon,lr"
    assert len(lines) == 4


@given(st.integers(0, 1000))
def test_unknown_network_kind(seed):
    with pytest.raises(ValueError):
        make_network("cnn", TINY_SCENARIO, seed)
