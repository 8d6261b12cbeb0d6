"""Per-interval graph features for the GN chain.

Node layouts: IoT ``[sum packet, sum load, min deadline]``, UAV-C
``[remaining energy, processing delay, capacity]``, MEC ``[delay, 0, 0]``.
Edge layouts: ``[link delay, x, y]`` with the coordinates of the UAV-C end.

Features are observed before the activation decision, so every delay is
evaluated under the reference routing where each UAV-C keeps the tasks of
its own IoT devices: link delays carry those tasks' packets at full band and
processing delays carry their loads.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..channel import ChannelParams
from ..routing import MEC, full_band_rate, iot, uav
from ..scenario import ScenarioConfig, Topology

NODE_WIDTH = 3
EDGE_WIDTH = 3


@dataclass(frozen=True)
class FeatureScales:
    """Divisors that bring raw features to order one. Fixed at training time
    and stored alongside network parameters."""

    packet: float
    load: float
    deadline: float
    energy: float
    delay: float
    capacity: float
    coord: float

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> "FeatureScales":
        cap = max(config.max_tasks_per_interval, 1)
        deadline = max(tt.deadline for tt in config.task_types)
        return cls(
            packet=max(tt.packet_size for tt in config.task_types) * cap,
            load=max(tt.mean_load for tt in config.task_types) * cap,
            deadline=deadline,
            energy=config.battery_capacity,
            delay=deadline,
            capacity=config.uav_capacity,
            coord=max(config.field_width, config.field_height),
        )

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class GraphFeatures:
    """One graph, or a disjoint batch of graphs.

    Edge sets: ``iu`` IoT->UAV (the association edges), ``uu`` UAV->UAV,
    ``um`` UAV->MEC and ``mu`` MEC->UAV. MEC rows are indexed by graph.
    """

    iot: np.ndarray
    uav: np.ndarray
    mec: np.ndarray
    iu_src: np.ndarray
    iu_dst: np.ndarray
    iu_feat: np.ndarray
    uu_src: np.ndarray
    uu_dst: np.ndarray
    uu_feat: np.ndarray
    um_src: np.ndarray
    um_dst: np.ndarray
    um_feat: np.ndarray
    mu_src: np.ndarray
    mu_dst: np.ndarray
    mu_feat: np.ndarray
    uav_graph: np.ndarray
    iot_graph: np.ndarray

    @property
    def num_graphs(self) -> int:
        return self.mec.shape[0]

    @property
    def num_uav(self) -> int:
        return self.uav.shape[0]

    @property
    def num_iot(self) -> int:
        return self.iot.shape[0]

    def validate(self) -> None:
        checks = [
            (self.iu_src, self.num_iot), (self.iu_dst, self.num_uav),
            (self.uu_src, self.num_uav), (self.uu_dst, self.num_uav),
            (self.um_src, self.num_uav), (self.um_dst, self.num_graphs),
            (self.mu_src, self.num_graphs), (self.mu_dst, self.num_uav),
        ]
        for idx, n in checks:
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise IndexError("edge endpoint index out of range")
        for x in (self.iot, self.uav, self.mec):
            if x.ndim != 2 or x.shape[1] != NODE_WIDTH:
                raise ValueError("node features must be (n, 3)")

    def relabel(self, iot_perm=None, uav_perm=None) -> "GraphFeatures":
        """Reorder nodes of a single graph: new node k is old node perm[k]."""
        iot_perm = np.arange(self.num_iot) if iot_perm is None else np.asarray(iot_perm)
        uav_perm = np.arange(self.num_uav) if uav_perm is None else np.asarray(uav_perm)
        inv_i = np.argsort(iot_perm)
        inv_u = np.argsort(uav_perm)
        return GraphFeatures(
            iot=self.iot[iot_perm], uav=self.uav[uav_perm], mec=self.mec,
            iu_src=inv_i[self.iu_src], iu_dst=inv_u[self.iu_dst], iu_feat=self.iu_feat,
            uu_src=inv_u[self.uu_src], uu_dst=inv_u[self.uu_dst], uu_feat=self.uu_feat,
            um_src=inv_u[self.um_src], um_dst=self.um_dst, um_feat=self.um_feat,
            mu_src=self.mu_src, mu_dst=inv_u[self.mu_dst], mu_feat=self.mu_feat,
            uav_graph=self.uav_graph[uav_perm], iot_graph=self.iot_graph[iot_perm],
        )


def batch_graphs(graphs) -> GraphFeatures:
    """Disjoint union with offset edge indices."""
    graphs = list(graphs)
    if len(graphs) == 1:
        return graphs[0]
    io = uo = go = 0
    parts = {name: [] for name in GraphFeatures.__dataclass_fields__}
    for g in graphs:
        parts["iot"].append(g.iot)
        parts["uav"].append(g.uav)
        parts["mec"].append(g.mec)
        parts["iu_src"].append(g.iu_src + io)
        parts["iu_dst"].append(g.iu_dst + uo)
        parts["iu_feat"].append(g.iu_feat)
        parts["uu_src"].append(g.uu_src + uo)
        parts["uu_dst"].append(g.uu_dst + uo)
        parts["uu_feat"].append(g.uu_feat)
        parts["um_src"].append(g.um_src + uo)
        parts["um_dst"].append(g.um_dst + go)
        parts["um_feat"].append(g.um_feat)
        parts["mu_src"].append(g.mu_src + go)
        parts["mu_dst"].append(g.mu_dst + uo)
        parts["mu_feat"].append(g.mu_feat)
        parts["uav_graph"].append(g.uav_graph + go)
        parts["iot_graph"].append(g.iot_graph + go)
        io += g.num_iot
        uo += g.num_uav
        go += g.num_graphs
    return GraphFeatures(**{k: np.concatenate(v) for k, v in parts.items()})


@lru_cache(maxsize=4096)
def _rate_tables(topology: Topology, channel: ChannelParams, t: int):
    J = topology.num_uav
    nearest = topology.nearest_uav(t)
    iu = np.array([full_band_rate(topology, channel, iot(i), uav(int(nearest[i])), t)
                   for i in range(topology.num_iot)])
    uu = np.zeros((J, J))
    for a in range(J):
        for b in range(J):
            if a != b:
                uu[a, b] = full_band_rate(topology, channel, uav(a), uav(b), t)
    um = np.array([full_band_rate(topology, channel, uav(j), MEC, t) for j in range(J)])
    coords = np.array([[p.x, p.y] for p in (topology.uav_position(j, t) for j in range(J))])
    return nearest, iu, uu, um, coords


def build_features(
    topology: Topology,
    t: int,
    tasks_t,
    remaining,
    config: ScenarioConfig,
    scales: FeatureScales,
    uav_capacity=None,
) -> GraphFeatures:
    """Features of interval ``t`` given its tasks and the UAV-C energies."""
    I, J = topology.num_iot, topology.num_uav
    nearest, iu_rate, uu_rate, um_rate, coords = _rate_tables(topology, config.channel, t)
    caps = np.broadcast_to(
        np.asarray(config.uav_capacity if uav_capacity is None else uav_capacity, dtype=float), (J,))

    packets = np.zeros(I)
    loads = np.zeros(I)
    min_deadline = np.full(I, np.inf)
    for task in tasks_t:
        packets[task.iot_id] += task.packet_size
        loads[task.iot_id] += task.processing_load
        min_deadline[task.iot_id] = min(min_deadline[task.iot_id], task.deadline)
    min_deadline[~np.isfinite(min_deadline)] = 0.0

    uav_packets = np.bincount(nearest, weights=packets, minlength=J)
    uav_loads = np.bincount(nearest, weights=loads, minlength=J)
    delay_iu = packets / iu_rate
    proc_delay = uav_loads / caps
    mec_delay = loads.sum() / config.mec_capacity

    xy = coords / scales.coord
    iot_x = np.column_stack([packets / scales.packet, loads / scales.load, min_deadline / scales.deadline])
    uav_x = np.column_stack([np.asarray(remaining, dtype=float) / scales.energy,
                             proc_delay / scales.delay, caps / scales.capacity])
    mec_x = np.array([[mec_delay / scales.delay, 0.0, 0.0]])

    iu_src = np.arange(I)
    iu_dst = nearest.astype(np.int64)
    iu_feat = np.column_stack([delay_iu / scales.delay, xy[iu_dst]])

    pairs = [(a, b) for a in range(J) for b in range(J) if a != b]
    uu_src = np.array([a for a, _ in pairs], dtype=np.int64)
    uu_dst = np.array([b for _, b in pairs], dtype=np.int64)
    if pairs:
        uu_delay = uav_packets[uu_src] / uu_rate[uu_src, uu_dst]
        uu_feat = np.column_stack([uu_delay / scales.delay, xy[uu_dst]])
    else:
        uu_feat = np.zeros((0, EDGE_WIDTH))

    um_src = np.arange(J)
    um_feat = np.column_stack([uav_packets / um_rate / scales.delay, xy])

    return GraphFeatures(
        iot=iot_x, uav=uav_x, mec=mec_x,
        iu_src=iu_src, iu_dst=iu_dst, iu_feat=iu_feat,
        uu_src=uu_src, uu_dst=uu_dst, uu_feat=uu_feat,
        um_src=um_src, um_dst=np.zeros(J, dtype=np.int64), um_feat=um_feat,
        mu_src=np.zeros(J, dtype=np.int64), mu_dst=np.arange(J), mu_feat=um_feat.copy(),
        uav_graph=np.zeros(J, dtype=np.int64), iot_graph=np.zeros(I, dtype=np.int64),
    )


def random_features(rng: np.random.Generator, num_iot: int, num_uav: int) -> GraphFeatures:
    """Random well-formed single graph, for tests and benchmarks."""
    I, J = num_iot, num_uav
    iu_dst = rng.integers(J, size=I)
    pairs = [(a, b) for a in range(J) for b in range(J) if a != b]
    uu_src = np.array([a for a, _ in pairs], dtype=np.int64)
    uu_dst = np.array([b for _, b in pairs], dtype=np.int64)
    mec = np.zeros((1, NODE_WIDTH))
    mec[0, 0] = rng.uniform()
    um_feat = rng.uniform(size=(J, EDGE_WIDTH))
    return GraphFeatures(
        iot=rng.uniform(size=(I, NODE_WIDTH)), uav=rng.uniform(size=(J, NODE_WIDTH)), mec=mec,
        iu_src=np.arange(I), iu_dst=iu_dst, iu_feat=rng.uniform(size=(I, EDGE_WIDTH)),
        uu_src=uu_src, uu_dst=uu_dst, uu_feat=rng.uniform(size=(len(pairs), EDGE_WIDTH)),
        um_src=np.arange(J), um_dst=np.zeros(J, dtype=np.int64), um_feat=um_feat,
        mu_src=np.zeros(J, dtype=np.int64), mu_dst=np.arange(J), mu_feat=um_feat.copy(),
        uav_graph=np.zeros(J, dtype=np.int64), iot_graph=np.zeros(I, dtype=np.int64),
    )
