"""Seeded evaluation sweeps over the study axes, written as CSV rows."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gnn.mlp import ShapeError
from .rl.baselines import GreedyQPolicy, RandomPolicy, hfc_policy, hrr_policy
from .rl.env import EpisodeResult, OffloadEnv
from .scenario import KBYTE_BITS, ScenarioConfig, TaskType, build_topology, generate_tasks

KINDS = ("capacity", "packet_size", "load", "uav_failure", "scalability")
POLICIES = ("gnn", "dqn", "hfc", "hrr", "random")

DEFAULT_VALUES = {
    "capacity": [0.5, 0.75, 1.0, 1.5, 2.0],
    "packet_size": [16, 32, 64, 128],
    "load": [0.5, 1.0, 1.5, 2.0],
    "uav_failure": [0, 1, 2],
    "scalability": [24, 48, 96],
}

COLUMNS = ("kind", "policy", "sweep_value", "seed", "status", "violations", "num_tasks",
           "min_remaining_energy", "objective")


@dataclass
class SweepSpec:
    kind: str
    values: list = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    policies: list[str] = field(default_factory=lambda: ["hfc", "hrr"])
    out: str | Path | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; choose from {KINDS}")
        if not self.values:
            self.values = list(DEFAULT_VALUES[self.kind])
        if not self.seeds:
            raise ValueError("need at least one seed")
        unknown = set(self.policies) - set(POLICIES)
        if unknown:
            raise ValueError(f"unknown policies {sorted(unknown)}")


def _scaled_types(types, load=1.0, packet=1.0):
    return tuple(TaskType(tt.deadline, tt.mean_load * load, tt.packet_size * packet) for tt in types)


def sweep_point(kind: str, base: ScenarioConfig, value) -> tuple[ScenarioConfig, int]:
    """Scenario for one sweep value, plus how many UAV-Cs fail at inference."""
    if kind == "capacity":
        return base.replace(uav_capacity=base.uav_capacity * value), 0
    if kind == "packet_size":
        types = tuple(TaskType(tt.deadline, tt.mean_load, value * KBYTE_BITS) for tt in base.task_types)
        return base.replace(task_types=types), 0
    if kind == "load":
        return base.replace(task_types=_scaled_types(base.task_types, load=value)), 0
    if kind == "uav_failure":
        if not 0 <= value < base.num_uav:
            raise ValueError(f"cannot remove {value} of {base.num_uav} UAV-Cs")
        return base, int(value)
    if kind == "scalability":
        ratio = base.num_iot / value
        return base.replace(num_iot=int(value),
                            task_types=_scaled_types(base.task_types, load=ratio, packet=ratio)), 0
    raise ValueError(f"unknown experiment kind {kind!r}")


def make_policy(name: str, networks: dict, seed: int):
    if name == "hfc":
        return hfc_policy
    if name == "hrr":
        return hrr_policy
    if name == "random":
        return RandomPolicy(10_000 + seed)
    if name not in networks:
        raise KeyError(f"policy {name!r} needs a trained network")
    return GreedyQPolicy(networks[name])


def evaluate(policy, config: ScenarioConfig, seed: int, failed: int = 0) -> EpisodeResult:
    """One inference episode on the workload of ``seed``. The last ``failed``
    UAV-Cs are removed from the topology."""
    topology = build_topology(config)
    if failed:
        topology = topology.without_uavs(range(config.num_uav - failed, config.num_uav))
    env = OffloadEnv(config, topology)
    return env.run(policy, generate_tasks(config, seed))


def run_sweep(spec: SweepSpec, base: ScenarioConfig | None = None, networks: dict | None = None) -> list[dict]:
    base = base or ScenarioConfig()
    networks = networks or {}
    rows = []
    for value in spec.values:
        config, failed = sweep_point(spec.kind, base, value)
        for seed in spec.seeds:
            for name in spec.policies:
                row = {"kind": spec.kind, "policy": name, "sweep_value": value, "seed": seed}
                try:
                    res = evaluate(make_policy(name, networks, seed), config, seed, failed)
                except ShapeError:
                    row.update(status="shape_error", violations="", num_tasks="",
                               min_remaining_energy="", objective="")
                else:
                    row.update(status="ok", violations=res.violations, num_tasks=res.num_tasks,
                               min_remaining_energy=res.min_remaining, objective=res.objective)
                rows.append(row)
    rows.sort(key=lambda r: (POLICIES.index(r["policy"]), float(r["sweep_value"]), r["seed"]))
    if spec.out is not None:
        write_rows(rows, spec.out)
    return rows


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def read_rows(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def seed_mean(rows, policy: str, metric: str) -> dict:
    """Mean of ``metric`` per sweep value for one policy (ok rows only)."""
    out: dict = {}
    for r in rows:
        if r["policy"] == policy and r["status"] == "ok":
            out.setdefault(float(r["sweep_value"]), []).append(float(r[metric]))
    return {k: float(np.mean(v)) for k, v in sorted(out.items())}
