"""Task routing over the IoT -> UAV-C -> MEC graph and end-to-end delays."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .channel import ChannelParams, UnreachableLinkError, link_rate
from .scenario import Task, Topology


class Vertex(NamedTuple):
    kind: str  # "iot" | "uav" | "mec"
    index: int


MEC = Vertex("mec", 0)


def iot(i: int) -> Vertex:
    return Vertex("iot", i)


def uav(j: int) -> Vertex:
    return Vertex("uav", j)


Edge = tuple[Vertex, Vertex]


@dataclass
class Assignment:
    """Decision triple for one interval.

    ``flows[k]`` lists the directed edges carried by task k (the y variables),
    ``placements[k]`` the vertices processing it (the z variables; exactly one
    when valid) and ``x`` the UAV activation bits.
    """

    t: int
    x: np.ndarray
    tasks: list[Task]
    flows: list[list[Edge]]
    placements: list[list[Vertex]]

    def path(self, k: int) -> list[Vertex]:
        edges = self.flows[k]
        if not edges:
            return [iot(self.tasks[k].iot_id)]
        return [edges[0][0]] + [h for _, h in edges]


@dataclass
class DelayReport:
    edge_delays: dict[Edge, float]
    node_delays: dict[Vertex, float]
    task_delays: np.ndarray
    violations: np.ndarray

    @property
    def num_violations(self) -> int:
        return int(self.violations.sum())


def route_tasks(
    tasks: Sequence[Task],
    topology: Topology,
    activations,
    t: int,
    max_relay_hops: int = 1,
) -> Assignment:
    """Send each task to its nearest UAV-C; process there when active, else
    relay to the active UAV-C nearest to that first hop, else to the MEC."""
    x = np.asarray(activations, dtype=np.int8)
    if x.shape != (topology.num_uav,):
        raise ValueError(f"need {topology.num_uav} activation bits, got shape {x.shape}")
    nearest = topology.nearest_uav(t)
    relay = _relay_targets(topology, t, x.tobytes()) if max_relay_hops >= 1 else None

    flows, placements = [], []
    for task in tasks:
        u = int(nearest[task.iot_id])
        src = iot(task.iot_id)
        if x[u]:
            flows.append([(src, uav(u))])
            placements.append([uav(u)])
        elif relay is not None and relay[u] >= 0:
            v = relay[u]
            flows.append([(src, uav(u)), (uav(u), uav(v))])
            placements.append([uav(v)])
        else:
            flows.append([(src, uav(u)), (uav(u), MEC)])
            placements.append([MEC])
    return Assignment(t, x, list(tasks), flows, placements)


@lru_cache(maxsize=4096)
def _relay_targets(topology: Topology, t: int, xbytes: bytes) -> tuple[int, ...]:
    x = np.frombuffer(xbytes, dtype=np.int8)
    active = np.flatnonzero(x)
    out = []
    for u in range(topology.num_uav):
        if x[u] or active.size == 0:
            out.append(-1)
            continue
        pu = topology.uav_position(u, t)
        dists = [pu.distance(topology.uav_position(int(v), t)) for v in active]
        out.append(int(active[int(np.argmin(dists))]))
    return tuple(out)


def vertex_position(topology: Topology, v: Vertex, t: int):
    if v.kind == "iot":
        return topology.iot_positions[v.index]
    if v.kind == "uav":
        return topology.uav_position(v.index, t)
    return topology.mec_position


@lru_cache(maxsize=65536)
def full_band_rate(topology: Topology, channel: ChannelParams, g: Vertex, h: Vertex, t: int) -> float:
    """Rate of (g, h) at interval t with the whole node bandwidth on it."""
    tx = channel.tx_power_iot if g.kind == "iot" else channel.tx_power_uav
    return link_rate(
        vertex_position(topology, g, t),
        vertex_position(topology, h, t),
        channel,
        tx_power=tx,
        air_to_air=(g.kind == "uav" and h.kind == "uav"),
    )


def edge_rates(assignment: Assignment, topology: Topology, channel: ChannelParams,
               fdma_split: bool = True) -> dict[Edge, float]:
    """Rate of every used edge. With ``fdma_split`` each transmitter shares its
    bandwidth equally among its distinct outgoing links in the interval."""
    used = {e for f in assignment.flows for e in f}
    out_degree = Counter(g for g, _ in used)
    rates = {}
    for g, h in used:
        share = 1.0 / out_degree[g] if fdma_split else 1.0
        rates[(g, h)] = full_band_rate(topology, channel, g, h, assignment.t) * share
    return rates


def compute_delays(
    assignment: Assignment,
    topology: Topology,
    channel: ChannelParams,
    uav_capacity,
    mec_capacity: float,
    fdma_split: bool = True,
) -> DelayReport:
    """Aggregate link and processing delays, then per-task end-to-end delay.

    Each link delay sums the packets of every task on that link; each
    processing delay sums the loads placed on that unit. A task accrues the
    full aggregate of every link on its path and of its processing unit.
    """
    caps = np.broadcast_to(np.asarray(uav_capacity, dtype=float), (topology.num_uav,))
    rates = edge_rates(assignment, topology, channel, fdma_split)

    edge_delays: dict[Edge, float] = defaultdict(float)
    node_delays: dict[Vertex, float] = defaultdict(float)
    for task, flow, place in zip(assignment.tasks, assignment.flows, assignment.placements):
        for e in flow:
            r = rates[e]
            if r <= 0:
                raise UnreachableLinkError(f"edge {e} has rate {r}")
            edge_delays[e] += task.packet_size / r
        for v in place:
            cap = mec_capacity if v.kind == "mec" else caps[v.index]
            node_delays[v] += task.processing_load / cap

    n = len(assignment.tasks)
    task_delays = np.zeros(n)
    deadlines = np.zeros(n)
    for k, (task, flow, place) in enumerate(zip(assignment.tasks, assignment.flows, assignment.placements)):
        task_delays[k] = sum(edge_delays[e] for e in flow) + sum(node_delays[v] for v in place)
        deadlines[k] = task.deadline
    return DelayReport(dict(edge_delays), dict(node_delays), task_delays, task_delays > deadlines)


def check_flow_conservation(assignment: Assignment, k: int, literal_mec_sink: bool = False) -> bool:
    """Net out-flow is +1 at the task's IoT, -1 at its sink and 0 elsewhere,
    with binary flows (no repeated edge or vertex). The sink is the processing
    vertex, or the MEC under the literal reading."""
    task = assignment.tasks[k]
    flow = assignment.flows[k]
    source = iot(task.iot_id)
    if literal_mec_sink:
        sink = MEC
    else:
        if len(assignment.placements[k]) != 1:
            return False
        sink = assignment.placements[k][0]
    if len(set(flow)) != len(flow):
        return False
    outs = Counter(g for g, _ in flow)
    ins = Counter(h for _, h in flow)
    if any(c > 1 for c in outs.values()) or any(c > 1 for c in ins.values()):
        return False
    for v in set(outs) | set(ins) | {source, sink}:
        net = outs[v] - ins[v]
        expected = 1 if v == source else -1 if v == sink else 0
        if source == sink:
            expected = 0
        if net != expected:
            return False
    return True


def validate_assignment(assignment: Assignment, big_m: int | None = None) -> list[str]:
    """Violations of single placement, flow reaching the placement and the
    big-M activation coupling. Empty means feasible."""
    problems = []
    m = len(assignment.tasks) if big_m is None else big_m
    placed = Counter()
    for k, (flow, place) in enumerate(zip(assignment.flows, assignment.placements)):
        if len(place) != 1:
            problems.append(f"task {k}: placed on {len(place)} units (single placement)")
        reach = sum(1 for _, h in flow if h in place)
        if reach != 1:
            problems.append(f"task {k}: {reach} flow edges enter its processing units (reachability)")
        for v in place:
            if v.kind == "uav":
                placed[v.index] += 1
    for j, count in sorted(placed.items()):
        if count > m * int(assignment.x[j]):
            problems.append(f"uav {j}: {count} tasks placed with x={int(assignment.x[j])} (activation)")
    return problems
