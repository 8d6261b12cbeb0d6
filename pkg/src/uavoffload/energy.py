"""UAV-C battery accounting, severity shaping, per-interval reward and the
episode objective."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np


class DepletedError(RuntimeError):
    pass


@dataclass(frozen=True)
class UavEnergyState:
    battery_capacity: float
    propulsion_per_interval: float
    comm_per_interval: float
    processing_per_active_interval: float
    remaining: float
    depleted: bool = False

    @classmethod
    def full(cls, battery, propulsion, processing, comm=0.0) -> "UavEnergyState":
        return cls(battery, propulsion, comm, processing, battery)

    @classmethod
    def from_config(cls, config) -> "UavEnergyState":
        return cls.full(config.battery_capacity, config.propulsion_per_interval,
                        config.processing_per_interval, config.comm_per_interval)


@dataclass(frozen=True)
class ObjectiveWeights:
    w: float = 0.5
    theta_h: float = 1.0
    theta_d: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        if self.theta_h <= 0 or self.theta_d <= 0:
            raise ValueError("normalizers must be positive")


def step_energy(state: UavEnergyState, active) -> UavEnergyState:
    """Draw one interval of propulsion, communication and (if active)
    processing energy. Running dry clamps at zero and marks the UAV depleted."""
    if state.depleted:
        raise DepletedError("cannot step a depleted UAV-C")
    draw = state.propulsion_per_interval + state.comm_per_interval
    if active:
        draw += state.processing_per_active_interval
    remaining = state.remaining - draw
    if remaining < 0:
        return replace(state, remaining=0.0, depleted=True)
    return replace(state, remaining=remaining)


def closed_form_remaining(battery, propulsion, comm, processing, activations) -> float:
    """Remaining energy after len(activations) intervals in one expression."""
    activations = list(activations)
    return battery - (propulsion + comm) * len(activations) - processing * sum(activations)


def min_energy_index(states: Sequence[UavEnergyState]) -> int:
    remaining = [s.remaining for s in states]
    return int(np.argmin(remaining))


def severity(states: Sequence[UavEnergyState], x, mode: str = "penalty") -> float:
    """+1 when the lowest-battery UAV-C is idle; otherwise a quadratic term in
    its drained fraction, negative in ``penalty`` mode and positive in
    ``literal`` mode."""
    if not states:
        raise ValueError("need at least one UAV-C")
    j = min_energy_index(states)
    if not x[j]:
        return 1.0
    b = states[j].battery_capacity
    term = (states[j].remaining - b) ** 2 / b**2
    if mode == "penalty":
        return -term
    if mode == "literal":
        return term
    raise ValueError(f"unknown severity mode {mode!r}")


def reward(severity_val: float, violations_t: int, weights: ObjectiveWeights) -> float:
    if violations_t < 0:
        raise ValueError("violation count must be non-negative")
    return (weights.w / weights.theta_h) * severity_val - ((1.0 - weights.w) / weights.theta_d) * violations_t


def episode_objective(final_states, total_violations: int, weights: ObjectiveWeights) -> float:
    if isinstance(final_states, (int, float)):
        min_remaining = float(final_states)
    else:
        min_remaining = min(s.remaining for s in final_states)
    return (weights.w / weights.theta_h) * min_remaining - ((1.0 - weights.w) / weights.theta_d) * total_violations
