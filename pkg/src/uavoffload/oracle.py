"""Exact answers for small instances.

``enumerate_optimal`` scores every activation schedule through the simulator
and cross-checks each score against a second, loop-free implementation of the
delay, energy and objective arithmetic. Routing is fixed to the operational
rule, so the optimum is over activation schedules only.
``check_milp_feasibility`` tests an assignment against the integer-program
constraints written as matrices over flow and placement indicators.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rl.baselines import ScheduledPolicy
from .rl.env import OffloadEnv
from .routing import Assignment, MEC, Vertex
from .scenario import KBYTE_BITS, ScenarioConfig, Task, TaskType, Topology, build_topology, generate_tasks

MAX_UAV, MAX_INTERVALS, MAX_IOT = 3, 5, 6
MAX_SCHEDULE_BITS = 15


class InstanceTooLargeError(ValueError):
    pass


@dataclass
class SmallInstance:
    """A scenario small enough to enumerate, with its fixed workload.

    At most one task per IoT device per interval. ``big_m`` couples placements
    to activations and defaults to the number of IoT devices.
    """

    config: ScenarioConfig
    tasks: list[Task]
    big_m: int | None = None
    topology: Topology | None = field(default=None, repr=False)

    def __post_init__(self):
        c = self.config
        if c.num_uav > MAX_UAV or c.num_intervals > MAX_INTERVALS or c.num_iot > MAX_IOT:
            raise InstanceTooLargeError(
                f"J={c.num_uav}, T={c.num_intervals}, I={c.num_iot} exceeds "
                f"J<={MAX_UAV}, T<={MAX_INTERVALS}, I<={MAX_IOT}")
        if self.schedule_bits > MAX_SCHEDULE_BITS:
            raise InstanceTooLargeError(f"2^{self.schedule_bits} schedules exceed 2^{MAX_SCHEDULE_BITS}")
        seen = Counter((task.iot_id, task.interval) for task in self.tasks)
        if any(n > 1 for n in seen.values()):
            raise ValueError("a small instance allows one task per IoT device per interval")
        if self.big_m is None:
            self.big_m = c.num_iot
        if self.topology is None:
            self.topology = build_topology(c)

    @property
    def schedule_bits(self) -> int:
        return self.config.num_uav * self.config.num_intervals

    @classmethod
    def from_config(cls, config: ScenarioConfig, seed: int | None = None, big_m=None) -> "SmallInstance":
        return cls(config, generate_tasks(config, seed), big_m)


def tiny_instance(seed: int = 0) -> SmallInstance:
    """Two UAV-Cs, four IoT devices, four intervals and one task type; every
    device emits exactly one task per interval. Processing is costly and the
    MEC is slow, so the best schedules keep exactly one UAV-C working and
    share the work evenly. The reward's energy normalizer is lowered so one
    interval of severity outweighs a few deadline misses, as the objective's
    exchange rate does on this instance."""
    config = ScenarioConfig(
        num_iot=4, num_uav=2, num_intervals=4,
        task_types=(TaskType(2.0, 1.0, 32 * KBYTE_BITS),),
        arrival_mean=1e-6, max_tasks_per_interval=1,
        uav_capacity=4.0, mec_capacity=1.0, processing_per_interval=10.0,
        reward_theta_h=5.0, rng_seed=seed,
    )
    return SmallInstance.from_config(config)


def schedule_from_index(index: int, num_intervals: int, num_uav: int) -> np.ndarray:
    """Schedule whose row-major bits spell ``index`` with the first bit most
    significant, so increasing index is lexicographic order."""
    n = num_intervals * num_uav
    bits = [(index >> (n - 1 - k)) & 1 for k in range(n)]
    return np.array(bits, dtype=np.int8).reshape(num_intervals, num_uav)


# ---------------------------------------------------------------------------
# independent scorer

def _xyz(p):
    return np.array([p.x, p.y, p.z], dtype=float)


def _rate(src, dst, tx_power, air_to_air, ch, share):
    d = float(np.linalg.norm(dst - src))
    horiz = float(np.linalg.norm((dst - src)[:2]))
    theta = math.degrees(math.atan2(abs(dst[2] - src[2]), horiz))
    p = 1.0 if air_to_air else 1.0 / (1.0 + ch.a * math.exp(-ch.b * (theta - ch.a)))
    loss = 20.0 * math.log10(4.0 * math.pi * ch.fc * d / ch.c) + p * ch.eta_los + (1.0 - p) * ch.eta_nlos
    snr = tx_power * 10.0 ** (-loss / 10.0) / ch.noise_power
    return ch.bandwidth * share * math.log2(1.0 + snr)


def straight_line_score(instance: SmallInstance, schedule) -> dict:
    """Violations, final energies and objective of one schedule, computed
    without the routing, energy or environment modules."""
    c = instance.config
    topo = instance.topology
    ch = c.channel
    J, T = topo.num_uav, topo.num_intervals
    schedule = np.asarray(schedule, dtype=np.int64).reshape(T, J)
    energy = np.full(J, float(c.battery_capacity))
    dead = np.zeros(J, dtype=bool)
    violations = 0
    for t in range(T):
        x = schedule[t].copy()
        x[dead] = 0
        uavs = np.array([_xyz(topo.uav_routes[j][t]) for j in range(J)])
        mec = _xyz(topo.mec_position)
        tasks = [task for task in instance.tasks if task.interval == t]

        # hop lists: (kind, a, b) edges and the processing unit
        paths = []
        for task in tasks:
            pos = _xyz(topo.iot_positions[task.iot_id])
            first = int(np.argmin(np.linalg.norm(uavs - pos, axis=1)))
            hops = [("iu", task.iot_id, first)]
            if x[first]:
                unit = ("uav", first)
            elif c.max_relay_hops >= 1 and x.any():
                on = np.flatnonzero(x)
                target = int(on[np.argmin(np.linalg.norm(uavs[on] - uavs[first], axis=1))])
                hops.append(("uu", first, target))
                unit = ("uav", target)
            else:
                hops.append(("um", first, 0))
                unit = ("mec", 0)
            paths.append((task, hops, unit))

        links = {h for _, hops, _ in paths for h in hops}
        fanout = Counter(("iot", a) if k == "iu" else ("uav", a) for k, a, _ in links)
        link_delay = dict.fromkeys(links, 0.0)
        unit_delay: dict = {}
        for task, hops, unit in paths:
            for h in hops:
                k, a, b = h
                if k == "iu":
                    src, dst, tx, aa, owner = _xyz(topo.iot_positions[a]), uavs[b], ch.tx_power_iot, False, ("iot", a)
                elif k == "uu":
                    src, dst, tx, aa, owner = uavs[a], uavs[b], ch.tx_power_uav, True, ("uav", a)
                else:
                    src, dst, tx, aa, owner = uavs[a], mec, ch.tx_power_uav, False, ("uav", a)
                link_delay[h] += task.packet_size / _rate(src, dst, tx, aa, ch, 1.0 / fanout[owner])
            cap = c.mec_capacity if unit[0] == "mec" else c.uav_capacity
            unit_delay[unit] = unit_delay.get(unit, 0.0) + task.processing_load / cap
        for task, hops, unit in paths:
            total = sum(link_delay[h] for h in hops) + unit_delay[unit]
            violations += int(total > task.deadline)

        for j in range(J):
            if dead[j]:
                continue
            left = energy[j] - c.propulsion_per_interval - c.comm_per_interval - c.processing_per_interval * x[j]
            if left < 0:
                energy[j], dead[j] = 0.0, True
            else:
                energy[j] = left

    n = len(instance.tasks)
    theta_h = c.theta_h if c.theta_h is not None else c.battery_capacity
    theta_d = c.theta_d if c.theta_d is not None else max(n, 1)
    objective = c.weight / theta_h * energy.min() - (1.0 - c.weight) / theta_d * violations
    return {"violations": violations, "remaining": energy, "objective": float(objective)}


# ---------------------------------------------------------------------------
# enumeration

@dataclass
class OracleResult:
    schedule: np.ndarray
    objective: float
    scores: np.ndarray  # objective per schedule index
    violations: np.ndarray
    min_remaining: np.ndarray
    shape: tuple[int, int]

    def table_rows(self) -> list[dict]:
        T, J = self.shape
        rows = []
        for k in range(self.scores.size):
            bits = "".join(str(b) for b in schedule_from_index(k, T, J).ravel())
            rows.append({"index": k, "schedule": bits, "violations": int(self.violations[k]),
                         "min_remaining_energy": float(self.min_remaining[k]),
                         "objective": float(self.scores[k])})
        return rows

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["index", "schedule", "violations",
                                               "min_remaining_energy", "objective"])
            w.writeheader()
            for row in self.table_rows():
                row["objective"] = repr(row["objective"])
                row["min_remaining_energy"] = repr(row["min_remaining_energy"])
                w.writerow(row)


class OracleMismatchError(AssertionError):
    pass


def enumerate_optimal(instance: SmallInstance, cross_check: bool = True, tol: float = 1e-9) -> OracleResult:
    """Best activation schedule by exhaustive search. Ties go to the
    lexicographically smallest schedule (row-major, interval by interval)."""
    c = instance.config
    T, J = c.num_intervals, c.num_uav
    if instance.schedule_bits > MAX_SCHEDULE_BITS:
        raise InstanceTooLargeError(f"2^{instance.schedule_bits} schedules exceed 2^{MAX_SCHEDULE_BITS}")
    n = 1 << instance.schedule_bits
    env = OffloadEnv(c, instance.topology)
    scores = np.empty(n)
    viol = np.empty(n, dtype=np.int64)
    min_rem = np.empty(n)
    for k in range(n):
        sched = schedule_from_index(k, T, J)
        res = env.run(ScheduledPolicy(sched), list(instance.tasks))
        scores[k], viol[k], min_rem[k] = res.objective, res.violations, res.min_remaining
        if cross_check:
            ref = straight_line_score(instance, sched)
            if abs(ref["objective"] - res.objective) > tol * max(1.0, abs(res.objective)):
                raise OracleMismatchError(
                    f"schedule {k}: simulator {res.objective!r} vs straight-line {ref['objective']!r}")
    best = int(np.flatnonzero(scores == scores.max())[0])
    return OracleResult(schedule_from_index(best, T, J), float(scores[best]), scores, viol, min_rem, (T, J))


def schedule_objective(instance: SmallInstance, schedule) -> float:
    """Objective of one schedule through the simulator."""
    env = OffloadEnv(instance.config, instance.topology)
    return env.run(ScheduledPolicy(np.asarray(schedule)), list(instance.tasks)).objective


# ---------------------------------------------------------------------------
# integer-program constraints

@dataclass
class MilpReport:
    """Per-constraint failures. Task constraints list task indices; the
    activation constraint lists UAV-C indices."""

    flow_conservation: list[int]
    single_placement: list[int]
    reachability: list[int]
    activation: list[int]
    literal_mec_sink: bool = False

    @property
    def ok(self) -> bool:
        return not (self.flow_conservation or self.single_placement or self.reachability or self.activation)

    def status(self) -> dict[str, bool]:
        return {"flow_conservation": not self.flow_conservation,
                "single_placement": not self.single_placement,
                "reachability": not self.reachability,
                "activation": not self.activation}


def check_milp_feasibility(assignment: Assignment, instance: SmallInstance | None = None,
                           literal_mec_sink: bool = False, big_m: int | None = None) -> MilpReport:
    """Evaluate flow conservation, single placement, reachability and big-M
    activation on the 0/1 flow tensor ``y[k, g, h]`` and placement matrix
    ``z[k, unit]`` (UAV-Cs then the MEC)."""
    tasks = assignment.tasks
    J = len(assignment.x)
    num_iot = 1 + max([t.iot_id for t in tasks] + [-1])
    if instance is not None:
        num_iot = max(num_iot, instance.config.num_iot)
        if big_m is None:
            big_m = instance.big_m
    if big_m is None:
        big_m = num_iot

    def col(v: Vertex) -> int:
        if v.kind == "iot":
            return v.index
        if v.kind == "uav":
            return num_iot + v.index
        return num_iot + J

    V = num_iot + J + 1
    K = len(tasks)
    y = np.zeros((K, V, V), dtype=np.int64)
    z = np.zeros((K, J + 1), dtype=np.int64)
    for k in range(K):
        for g, h in assignment.flows[k]:
            y[k, col(g), col(h)] += 1
        for v in assignment.placements[k]:
            z[k, col(v) - num_iot] += 1

    flow_bad, place_bad, reach_bad = [], [], []
    for k, task in enumerate(tasks):
        # flow conservation: out - in equals +1 at the source, -1 at the sink
        b = np.zeros(V, dtype=np.int64)
        b[task.iot_id] += 1
        if literal_mec_sink:
            b[col(MEC)] -= 1
        elif z[k].sum() == 1:
            b[num_iot + int(np.argmax(z[k]))] -= 1
        else:
            b[:] = V + 1  # no single sink to conserve towards
        net = y[k].sum(axis=1) - y[k].sum(axis=0)
        binary = y[k].max(initial=0) <= 1
        simple = (y[k].sum(axis=1).max(initial=0) <= 1) and (y[k].sum(axis=0).max(initial=0) <= 1)
        if not (binary and simple and np.array_equal(net, b)):
            flow_bad.append(k)
        if z[k].sum() != 1 or z[k].max(initial=0) > 1:
            place_bad.append(k)
        # reachability: exactly one used edge enters the processing unit
        into_units = y[k][:, num_iot:].sum(axis=0)
        if int(into_units @ np.minimum(z[k], 1)) != 1:
            reach_bad.append(k)
    load = z[:, :J].sum(axis=0)
    act_bad = [int(j) for j in np.flatnonzero(load > big_m * np.asarray(assignment.x, dtype=np.int64))]
    return MilpReport(flow_bad, place_bad, reach_bad, act_bad, literal_mec_sink)
