"""Deep Q-learning over the offloading simulator.

Per-UAV factorized values: each UAV-C picks its own bit by epsilon-greedy
argmax and is regressed towards ``r + gamma * max_a Q_target(s')[j, a]`` with
the shared interval reward.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..gnn.chain import ChainConfig
from ..gnn.features import FeatureScales, GraphFeatures
from ..scenario import ScenarioConfig, build_topology, generate_tasks
from .env import OffloadEnv
from .networks import DenseQNetwork, GnnQNetwork

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass
class Transition:
    state: GraphFeatures
    action: np.ndarray
    reward: float
    next_state: GraphFeatures | None
    terminal: bool

    def __post_init__(self):
        if self.action.shape != (self.state.num_uav,):
            raise ValueError("action length must match the state's UAV count")


@dataclass
class TrainConfig:
    episodes: int = 3000
    batch_size: int = 128
    target_update_every: int = 50
    gamma: float = 0.95
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.999
    lr_start: float = 1e-3
    lr_decay: float = 0.5
    lr_decay_every: float = 0.25  # fraction of the run between lr halvings
    replay_capacity: int = 10_000
    train_every: int = 1
    fixed_workload: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size cannot exceed replay capacity")
        if self.episodes < 0 or self.batch_size <= 0 or self.target_update_every <= 0:
            raise ValueError("bad training sizes")

    def epsilon(self, episode: int) -> float:
        return max(self.epsilon_end, self.epsilon_start * self.epsilon_decay**episode)

    def learning_rate(self, episode: int) -> float:
        period = max(1, math.ceil(self.episodes * self.lr_decay_every))
        return self.lr_start * self.lr_decay ** (episode // period)


class ReplayBuffer:
    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.items: list[Transition] = []
        self.head = 0

    def __len__(self) -> int:
        return len(self.items)

    def push(self, item: Transition) -> None:
        if len(self.items) < self.capacity:
            self.items.append(item)
        else:
            self.items[self.head] = item
        self.head = (self.head + 1) % self.capacity

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        if batch_size > len(self.items):
            raise ValueError(f"buffer holds {len(self.items)} transitions, asked for {batch_size}")
        idx = rng.choice(len(self.items), size=batch_size, replace=False)
        return [self.items[k] for k in idx]


def select_actions(q: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Independent epsilon-greedy bit per UAV-C; exact ties pick 0."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    greedy = (q[:, 1] > q[:, 0]).astype(np.int8)
    explore = rng.random(q.shape[0]) < epsilon
    random_bits = rng.integers(0, 2, size=q.shape[0]).astype(np.int8)
    return np.where(explore, random_bits, greedy).astype(np.int8)


def td_targets(batch, target_net, gamma: float) -> list[np.ndarray]:
    """Bootstrapped per-UAV targets, one array per transition."""
    if not batch:
        raise ValueError("empty batch")
    live = [tr.next_state for tr in batch if not tr.terminal]
    next_max = []
    if live:
        q_next, _ = target_net.forward_batch(live)
        row = 0
        for s in live:
            next_max.append(q_next[row:row + s.num_uav].max(axis=1))
            row += s.num_uav
    out, k = [], 0
    for tr in batch:
        J = tr.state.num_uav
        if tr.terminal:
            out.append(np.full(J, tr.reward))
        else:
            out.append(tr.reward + gamma * next_max[k])
            k += 1
    return out


class Adam:
    def __init__(self, params, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.k = 0

    def step(self, params, grads, lr: float) -> None:
        self.k += 1
        b1, b2 = self.beta1, self.beta2
        c1, c2 = 1.0 - b1**self.k, 1.0 - b2**self.k
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def td_loss_and_grads(net, batch, targets):
    """Mean squared TD error over (transition, UAV) entries of the taken
    actions, and its parameter gradients."""
    q, cache = net.forward_batch([tr.state for tr in batch])
    actions = np.concatenate([tr.action for tr in batch]).astype(np.int64)
    y = np.concatenate(targets)
    rows = np.arange(q.shape[0])
    err = q[rows, actions] - y
    n = err.size
    loss = float(np.mean(err**2))
    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * err / n
    return loss, net.backward(cache, dq)


def train_step(net, target_net, batch, lr: float, optimizer: Adam, gamma: float = 0.95):
    targets = td_targets(batch, target_net, gamma)
    loss, grads = td_loss_and_grads(net, batch, targets)
    if not math.isfinite(loss):
        raise TrainingError(f"non-finite TD loss {loss}; max |target| = "
                            f"{max(np.abs(t).max() for t in targets):.3g}")
    optimizer.step(net.params, grads, lr)
    net.bump()
    return net, loss


@dataclass
class TrainLog:
    rows: list[dict] = field(default_factory=list)
    COLUMNS = ("episode", "total_reward", "violations", "min_remaining_energy", "epsilon", "lr")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=self.COLUMNS)
            w.writeheader()
            for row in self.rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def make_network(kind: str, config: ScenarioConfig, seed: int = 0, chain_config: ChainConfig | None = None,
                 hidden=(64, 64)):
    scales = FeatureScales.from_config(config)
    if kind == "gnn":
        return GnnQNetwork.init(scales, chain_config, seed)
    if kind == "dqn":
        return DenseQNetwork.init(config.num_iot, config.num_uav, scales, hidden, seed)
    raise ValueError(f"unknown network kind {kind!r}")


def train(scenario: ScenarioConfig, tc: TrainConfig, network: str | object = "gnn",
          chain_config: ChainConfig | None = None):
    """Offline DQN training. Returns (trained network, TrainLog)."""
    net = make_network(network, scenario, tc.rng_seed, chain_config) if isinstance(network, str) else network
    target = net.copy()
    opt = Adam(net.params)
    buffer = ReplayBuffer(tc.replay_capacity)
    rng = np.random.default_rng([tc.rng_seed, 7])
    workload_rng = np.random.default_rng([tc.rng_seed, 11])
    env = OffloadEnv(scenario, build_topology(scenario))
    fixed_tasks = generate_tasks(scenario) if tc.fixed_workload else None
    trainlog = TrainLog()
    steps = 0

    for episode in range(tc.episodes):
        eps, lr = tc.epsilon(episode), tc.learning_rate(episode)
        tasks = fixed_tasks if tc.fixed_workload else generate_tasks(scenario, int(workload_rng.integers(2**62)))
        obs = env.reset(tasks)
        state = obs.features(net.scales)
        total_r, viol = 0.0, 0
        for t in range(env.num_intervals):
            x = select_actions(net.q_values(state), eps, rng)
            res = env.step(x)
            total_r += res.reward
            viol += res.violations
            nxt = None if res.done else env.features(net.scales)
            buffer.push(Transition(state, res.x, res.reward, nxt, res.done))
            state = nxt
            steps += 1
            if len(buffer) >= tc.batch_size and steps % tc.train_every == 0:
                train_step(net, target, buffer.sample(tc.batch_size, rng), lr, opt, tc.gamma)
            if steps % tc.target_update_every == 0:
                target = net.copy()
        trainlog.rows.append({
            "episode": episode, "total_reward": total_r, "violations": viol,
            "min_remaining_energy": float(env.remaining.min()), "epsilon": eps, "lr": lr,
        })
        if episode % 100 == 0:
            log.info("episode %d reward %.4f violations %d eps %.3f", episode, total_r, viol, eps)
    return net, trainlog
