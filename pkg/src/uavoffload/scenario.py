"""Scenario configuration, topology construction and task workloads."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import ChannelParams, Position

KBYTE_BITS = 8 * 1024


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TaskType:
    deadline: float  # s
    mean_load: float  # s of work at unit capacity
    packet_size: float  # bits


DEFAULT_TASK_TYPES = (
    TaskType(6.0, 0.6, 32 * KBYTE_BITS),
    TaskType(10.0, 1.0, 32 * KBYTE_BITS),
    TaskType(15.0, 1.5, 32 * KBYTE_BITS),
)


@dataclass(frozen=True)
class Task:
    iot_id: int
    interval: int
    packet_size: float
    processing_load: float
    deadline: float
    task_type: int = 0
    arrival_time: float = 0.0  # offset from the interval start, s

    def __post_init__(self):
        if not (self.packet_size > 0 and self.processing_load > 0 and self.deadline > 0):
            raise ValueError(f"task fields must be positive: {self}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to build one simulated deployment.

    Energies are in Wh per interval. Capacities are in load-seconds per
    second, so a task of load L takes L / C seconds on a unit of capacity C.
    Normalizers left as None resolve to the battery capacity (``theta_h``,
    ``reward_theta_h``) and to the episode's task count (``theta_d``,
    ``reward_theta_d``).
    """

    num_iot: int = 24
    num_uav: int = 8
    num_intervals: int = 18
    channel: ChannelParams = field(default_factory=ChannelParams)
    task_types: tuple[TaskType, ...] = DEFAULT_TASK_TYPES
    arrival_mean: float = 0.5
    interval_length: float = 1.0
    max_tasks_per_interval: int = 8
    battery_capacity: float = 100.0
    propulsion_per_interval: float = 2.0
    comm_per_interval: float = 0.0
    processing_per_interval: float = 3.0
    uav_capacity: float = 3.0
    mec_capacity: float = 6.0
    weight: float = 0.5
    theta_h: float | None = None
    theta_d: float | None = None
    reward_theta_h: float | None = None
    reward_theta_d: float | None = None
    severity_mode: str = "penalty"
    max_relay_hops: int = 1
    field_width: float = 400.0
    field_height: float = 400.0
    altitude: float = 5.0
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_iot", "num_uav", "num_intervals"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not self.task_types:
            raise ConfigError("need at least one task type")
        for tt in self.task_types:
            if not (tt.deadline > 0 and tt.mean_load > 0 and tt.packet_size > 0):
                raise ConfigError(f"bad task type {tt}")
        if not self.arrival_mean > 0:
            raise ConfigError("arrival_mean must be positive (inf disables arrivals)")
        if self.max_tasks_per_interval < 0 or self.interval_length <= 0:
            raise ConfigError("bad interval settings")
        if self.battery_capacity <= 0 or min(self.propulsion_per_interval, self.comm_per_interval,
                                             self.processing_per_interval) < 0:
            raise ConfigError("bad energy settings")
        if self.uav_capacity <= 0 or self.mec_capacity <= 0:
            raise ConfigError("capacities must be positive")
        if not 0.0 <= self.weight <= 1.0:
            raise ConfigError("weight must lie in [0, 1]")
        for name in ("theta_h", "theta_d", "reward_theta_h", "reward_theta_d"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.severity_mode not in ("penalty", "literal"):
            raise ConfigError("severity_mode must be 'penalty' or 'literal'")
        if self.max_relay_hops < 0:
            raise ConfigError("max_relay_hops must be >= 0")
        if self.altitude < 0:
            raise ConfigError("altitude must be >= 0")

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    @property
    def total_capacity_draw(self) -> float:
        return self.propulsion_per_interval + self.comm_per_interval

    def to_dict(self) -> dict:
        d = asdict(self)
        d["task_types"] = [asdict(tt) for tt in self.task_types]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "channel" in d:
            d["channel"] = ChannelParams(**d["channel"])
        if "task_types" in d:
            d["task_types"] = tuple(TaskType(**tt) for tt in d["task_types"])
        return cls(**d)


def config_schema() -> dict:
    text = resources.files("uavoffload.data").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def load_config(path: str | Path) -> ScenarioConfig:
    import jsonschema

    data = json.loads(Path(path).read_text())
    try:
        jsonschema.validate(data, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {where}: {exc.message}") from None
    return ScenarioConfig.from_dict(data)


def save_config(config: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# topology

def _grid_shape(n: int) -> tuple[int, int]:
    """(cols, rows) with rows the largest divisor of n not above sqrt(n)."""
    rows = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return n // rows, rows


class Topology:
    """Vertex positions for every interval. Immutable by convention; hashing
    is by identity so per-topology caches stay cheap."""

    def __init__(self, iot_positions, uav_routes, mec_position, num_intervals, interval_length):
        self.iot_positions: tuple[Position, ...] = tuple(iot_positions)
        self.uav_routes: tuple[tuple[Position, ...], ...] = tuple(tuple(r) for r in uav_routes)
        self.mec_position: Position = mec_position
        self.num_intervals = int(num_intervals)
        self.interval_length = float(interval_length)
        if not self.iot_positions or not self.uav_routes or self.num_intervals <= 0:
            raise ConfigError("topology needs I > 0, J > 0, T > 0")
        if any(len(r) != self.num_intervals for r in self.uav_routes):
            raise ConfigError("every UAV route needs one waypoint per interval")
        self._nearest: dict[int, np.ndarray] = {}

    @property
    def num_iot(self) -> int:
        return len(self.iot_positions)

    @property
    def num_uav(self) -> int:
        return len(self.uav_routes)

    def uav_position(self, j: int, t: int) -> Position:
        if not (0 <= j < self.num_uav and 0 <= t < self.num_intervals):
            raise IndexError(f"no waypoint for uav {j} at interval {t}")
        return self.uav_routes[j][t]

    def nearest_uav(self, t: int) -> np.ndarray:
        """Index of the closest UAV for every IoT at interval t (ties to the
        smaller index)."""
        if t not in self._nearest:
            iot = np.array([[p.x, p.y, p.z] for p in self.iot_positions])
            uav = np.array([[p.x, p.y, p.z] for p in (r[t] for r in self.uav_routes)])
            dist = np.sqrt(((iot[:, None, :] - uav[None, :, :]) ** 2).sum(-1))
            self._nearest[t] = np.argmin(dist, axis=1)  # argmin keeps the first minimum
        return self._nearest[t]

    def without_uavs(self, removed) -> "Topology":
        removed = set(removed)
        keep = [r for j, r in enumerate(self.uav_routes) if j not in removed]
        return Topology(self.iot_positions, keep, self.mec_position,
                        self.num_intervals, self.interval_length)

    def to_dict(self) -> dict:
        pos = lambda p: [p.x, p.y, p.z]  # noqa: E731
        return {
            "iot_positions": [pos(p) for p in self.iot_positions],
            "uav_routes": [[pos(p) for p in r] for r in self.uav_routes],
            "mec_position": pos(self.mec_position),
            "num_intervals": self.num_intervals,
            "interval_length": self.interval_length,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def build_topology(config: ScenarioConfig) -> Topology:
    """IoT devices on a uniform grid; the field is split into one cell per
    UAV and each UAV loops over the four corners of a rectangle inset in its
    cell, one waypoint per interval. The MEC sits mid-way along the y=0 edge.
    """
    W, H = config.field_width, config.field_height
    I, J, T = config.num_iot, config.num_uav, config.num_intervals
    if W <= 0 or H <= 0:
        raise ConfigError("field dimensions must be positive")
    icols, irows = _grid_shape(I)
    ucols, urows = _grid_shape(J)
    # UAV cells: fewer columns than rows, so 8 UAVs give 2x4 cells of 200x100 m
    ucols, urows = min(ucols, urows), max(ucols, urows)
    cell_w, cell_h = W / ucols, H / urows
    if W / icols < 1.0 or H / irows < 1.0 or cell_w < 2.0 or cell_h < 2.0:
        raise ConfigError(f"field {W}x{H} m is too small for I={I}, J={J}")

    iot = [
        Position((c + 0.5) * W / icols, (r + 0.5) * H / irows, 0.0)
        for r in range(irows)
        for c in range(icols)
    ]
    routes = []
    for k in range(J):
        c, r = k % ucols, k // ucols
        x0, y0 = c * cell_w, r * cell_h
        loop = [
            (x0 + 0.25 * cell_w, y0 + 0.25 * cell_h),
            (x0 + 0.75 * cell_w, y0 + 0.25 * cell_h),
            (x0 + 0.75 * cell_w, y0 + 0.75 * cell_h),
            (x0 + 0.25 * cell_w, y0 + 0.75 * cell_h),
        ]
        routes.append([Position(*loop[t % len(loop)], config.altitude) for t in range(T)])
    mec = Position(W / 2.0, 0.0, 0.0)
    return Topology(iot, routes, mec, T, config.interval_length)


def uav_position(topology: Topology, j: int, t: int) -> Position:
    return topology.uav_position(j, t)


# ---------------------------------------------------------------------------
# workloads

def generate_tasks(config: ScenarioConfig, rng_seed: int | None = None) -> list[Task]:
    """Poisson arrivals per IoT per interval, capped at
    ``max_tasks_per_interval``. Types are uniform; loads are exponential with
    the type's mean. Ordered by (interval, iot, arrival)."""
    rng = np.random.default_rng(config.rng_seed if rng_seed is None else rng_seed)
    n_types = len(config.task_types)
    tasks = []
    for t in range(config.num_intervals):
        for i in range(config.num_iot):
            clock = 0.0
            for _ in range(config.max_tasks_per_interval):
                clock += rng.exponential(config.arrival_mean) if math.isfinite(config.arrival_mean) else math.inf
                if clock >= config.interval_length:
                    break
                k = int(rng.integers(n_types))
                tt = config.task_types[k]
                load = rng.exponential(tt.mean_load)
                # exponential draws of exactly 0 are possible in principle
                load = max(load, 1e-12)
                tasks.append(Task(i, t, tt.packet_size, load, tt.deadline, k, clock))
    return tasks


def tasks_by_interval(tasks, num_intervals: int) -> list[list[Task]]:
    out: list[list[Task]] = [[] for _ in range(num_intervals)]
    for task in tasks:
        out[task.interval].append(task)
    return out
