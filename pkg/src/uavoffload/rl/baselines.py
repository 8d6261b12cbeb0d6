"""Activation policies: the heuristic baselines, a uniform random policy,
fixed schedules and greedy policies over a Q-network."""
from __future__ import annotations

import numpy as np


def baseline_h_fc(num_uav: int) -> np.ndarray:
    """Full-time computing: every processing unit on."""
    return np.ones(num_uav, dtype=np.int8)


def baseline_h_rr(t: int, num_uav: int) -> np.ndarray:
    """Round robin: only UAV-C ``t mod J`` is on."""
    x = np.zeros(num_uav, dtype=np.int8)
    x[t % num_uav] = 1
    return x


def hfc_policy(obs) -> np.ndarray:
    return baseline_h_fc(obs.num_uav)


def hrr_policy(obs) -> np.ndarray:
    return baseline_h_rr(obs.t, obs.num_uav)


class RandomPolicy:
    def __init__(self, seed: int = 0):
        self.rng = np.random.default_rng(seed)

    def __call__(self, obs) -> np.ndarray:
        return self.rng.integers(0, 2, size=obs.num_uav).astype(np.int8)


class ScheduledPolicy:
    """Replays a (T, J) activation schedule."""

    def __init__(self, schedule):
        self.schedule = np.asarray(schedule, dtype=np.int8)

    def __call__(self, obs) -> np.ndarray:
        return self.schedule[obs.t]


class GreedyQPolicy:
    """Argmax of a Q-network's per-UAV values (ties go to 'off')."""

    def __init__(self, network):
        self.network = network

    def __call__(self, obs) -> np.ndarray:
        q = self.network.q_values(obs.features(self.network.scales))
        return (q[:, 1] > q[:, 0]).astype(np.int8)
