"""Episode simulator: one activation decision per interval, then routing,
delays, energy draw and reward."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..energy import ObjectiveWeights, UavEnergyState, episode_objective, reward, severity, step_energy
from ..gnn.features import FeatureScales, GraphFeatures, build_features
from ..routing import DelayReport, compute_delays, route_tasks
from ..scenario import ScenarioConfig, Task, Topology, build_topology, generate_tasks, tasks_by_interval


@dataclass
class Observation:
    t: int
    num_uav: int
    remaining: np.ndarray
    depleted: np.ndarray
    env: "OffloadEnv" = field(repr=False)

    def features(self, scales: FeatureScales) -> GraphFeatures:
        if self.env.t != self.t:
            raise RuntimeError(f"stale observation for interval {self.t}; env is at {self.env.t}")
        return self.env.features(scales)


@dataclass
class StepResult:
    x: np.ndarray
    reward: float
    severity: float
    violations: int
    num_tasks: int
    delays: DelayReport
    done: bool


@dataclass
class EpisodeResult:
    schedule: np.ndarray  # (T, J) applied activations
    violations_per_interval: np.ndarray
    tasks_per_interval: np.ndarray
    rewards: np.ndarray
    final_remaining: np.ndarray
    objective: float

    @property
    def violations(self) -> int:
        return int(self.violations_per_interval.sum())

    @property
    def num_tasks(self) -> int:
        return int(self.tasks_per_interval.sum())

    @property
    def min_remaining(self) -> float:
        return float(self.final_remaining.min())

    @property
    def violation_rate(self) -> float:
        return self.violations / max(self.num_tasks, 1)

    @property
    def total_reward(self) -> float:
        return float(self.rewards.sum())


def objective_weights(config: ScenarioConfig, num_tasks: int) -> ObjectiveWeights:
    return ObjectiveWeights(
        config.weight,
        config.theta_h if config.theta_h is not None else config.battery_capacity,
        config.theta_d if config.theta_d is not None else max(num_tasks, 1),
    )


def reward_weights(config: ScenarioConfig, num_tasks: int) -> ObjectiveWeights:
    """``num_tasks`` is the episode's task count, so per-interval violation
    terms sum to the objective's violation term."""
    return ObjectiveWeights(
        config.weight,
        config.reward_theta_h if config.reward_theta_h is not None else config.battery_capacity,
        config.reward_theta_d if config.reward_theta_d is not None else max(num_tasks, 1),
    )


class OffloadEnv:
    """Simulator over a fixed topology. ``reset`` loads a workload."""

    def __init__(self, config: ScenarioConfig, topology: Topology | None = None,
                 uav_capacity=None, fdma_split: bool = True):
        self.config = config
        self.topology = topology if topology is not None else build_topology(config)
        J = self.topology.num_uav
        self.uav_capacity = np.broadcast_to(
            np.asarray(config.uav_capacity if uav_capacity is None else uav_capacity, dtype=float), (J,)).copy()
        self.fdma_split = fdma_split
        self.tasks: list[list[Task]] = []
        self.num_tasks = 0
        self.t = 0
        self.states: list[UavEnergyState] = []
        self._features: dict = {}

    @property
    def num_uav(self) -> int:
        return self.topology.num_uav

    @property
    def num_intervals(self) -> int:
        return self.topology.num_intervals

    def reset(self, tasks=None, seed: int | None = None) -> Observation:
        if tasks is None:
            tasks = generate_tasks(self.config, seed)
        for task in tasks:
            if task.iot_id >= self.topology.num_iot:
                raise ValueError(f"task from IoT {task.iot_id} but topology has {self.topology.num_iot}")
        self.tasks = tasks_by_interval(tasks, self.num_intervals)
        self.num_tasks = sum(len(ts) for ts in self.tasks)
        self.t = 0
        self.states = [UavEnergyState.from_config(self.config) for _ in range(self.num_uav)]
        self._features = {}
        return self.observe()

    @property
    def remaining(self) -> np.ndarray:
        return np.array([s.remaining for s in self.states])

    @property
    def depleted(self) -> np.ndarray:
        return np.array([s.depleted for s in self.states])

    def observe(self) -> Observation:
        return Observation(self.t, self.num_uav, self.remaining, self.depleted, self)

    def features(self, scales: FeatureScales) -> GraphFeatures:
        key = (self.t, scales)
        if key not in self._features:
            self._features[key] = build_features(
                self.topology, self.t, self.tasks[self.t], self.remaining,
                self.config, scales, self.uav_capacity)
        return self._features[key]

    def step(self, x) -> StepResult:
        if self.t >= self.num_intervals:
            raise RuntimeError("episode already finished")
        x = np.asarray(x, dtype=np.int8).copy()
        if x.shape != (self.num_uav,):
            raise ValueError(f"need {self.num_uav} activation bits")
        x[self.depleted] = 0  # a drained UAV-C stays off
        tasks_t = self.tasks[self.t]
        assignment = route_tasks(tasks_t, self.topology, x, self.t, self.config.max_relay_hops)
        report = compute_delays(assignment, self.topology, self.config.channel,
                                self.uav_capacity, self.config.mec_capacity, self.fdma_split)
        sev = severity(self.states, x, self.config.severity_mode)
        r = reward(sev, report.num_violations, reward_weights(self.config, self.num_tasks))
        self.states = [s if s.depleted else step_energy(s, x[j]) for j, s in enumerate(self.states)]
        self.t += 1
        self._features = {}
        return StepResult(x, r, sev, report.num_violations, len(tasks_t), report,
                          self.t >= self.num_intervals)

    def run(self, policy, tasks=None, seed: int | None = None) -> EpisodeResult:
        """Play one episode with ``policy(observation) -> activation bits``."""
        obs = self.reset(tasks, seed)
        T, J = self.num_intervals, self.num_uav
        schedule = np.zeros((T, J), dtype=np.int8)
        viol = np.zeros(T, dtype=np.int64)
        ntasks = np.zeros(T, dtype=np.int64)
        rewards = np.zeros(T)
        for t in range(T):
            res = self.step(policy(obs))
            schedule[t], viol[t], ntasks[t], rewards[t] = res.x, res.violations, res.num_tasks, res.reward
            obs = self.observe()
        weights = objective_weights(self.config, int(ntasks.sum()))
        obj = episode_objective(self.states, int(viol.sum()), weights)
        return EpisodeResult(schedule, viol, ntasks, rewards, self.remaining, obj)
