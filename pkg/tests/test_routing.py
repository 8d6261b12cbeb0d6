import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uavoffload.channel import ChannelParams, Position, link_rate
from uavoffload.routing import (MEC, Assignment, check_flow_conservation, compute_delays, edge_rates,
                                full_band_rate, iot, route_tasks, uav, validate_assignment)
from uavoffload.scenario import ScenarioConfig, Task, Topology, build_topology, generate_tasks, tasks_by_interval

CH = ChannelParams()


def two_uav_topology():
    iots = [Position(10, 0, 0), Position(90, 0, 0)]
    routes = [[Position(0, 0, 5)], [Position(100, 0, 5)]]
    return Topology(iots, routes, Position(50, -50, 0), 1, 1.0)


def task(i, load=1.0, packet=8000.0, deadline=5.0):
    return Task(i, 0, packet, load, deadline)


def test_local_processing_when_nearest_active():
    topo = two_uav_topology()
    a = route_tasks([task(0), task(1)], topo, [1, 1], 0)
    assert a.flows == [[(iot(0), uav(0))], [(iot(1), uav(1))]]
    assert a.placements == [[uav(0)], [uav(1)]]


def test_relay_to_active_neighbour():
    topo = two_uav_topology()
    a = route_tasks([task(0)], topo, [0, 1], 0)
    assert a.path(0) == [iot(0), uav(0), uav(1)]
    assert a.placements[0] == [uav(1)]


def test_all_off_goes_to_mec():
    topo = two_uav_topology()
    a = route_tasks([task(0), task(1)], topo, [0, 0], 0)
    assert a.path(0) == [iot(0), uav(0), MEC]
    assert a.placements == [[MEC], [MEC]]


def test_no_relay_hops_goes_to_mec():
    topo = two_uav_topology()
    a = route_tasks([task(0)], topo, [0, 1], 0, max_relay_hops=0)
    assert a.path(0) == [iot(0), uav(0), MEC]


def test_relay_picks_nearest_active_with_index_ties():
    iots = [Position(50, 0, 0)]
    routes = [[Position(50, 0, 5)], [Position(0, 0, 5)], [Position(100, 0, 5)]]
    topo = Topology(iots, routes, Position(0, 0, 0), 1, 1.0)
    a = route_tasks([task(0)], topo, [0, 1, 1], 0)
    assert a.placements[0] == [uav(1)]


def test_activation_shape_checked():
    with pytest.raises(ValueError):
        route_tasks([], two_uav_topology(), [1, 1, 1], 0)


def test_delays_by_hand():
    topo = two_uav_topology()
    tasks = [task(0, load=1.0, packet=8000.0), task(0, load=2.0, packet=4000.0), task(1, load=3.0)]
    a = route_tasks(tasks, topo, [0, 1], 0)
    rep = compute_delays(a, topo, CH, uav_capacity=2.0, mec_capacity=10.0)
    r_i0 = link_rate(Position(10, 0, 0), Position(0, 0, 5), CH, tx_power=CH.tx_power_iot)
    r_i1 = link_rate(Position(90, 0, 0), Position(100, 0, 5), CH, tx_power=CH.tx_power_iot)
    r_uu = link_rate(Position(0, 0, 5), Position(100, 0, 5), CH, tx_power=CH.tx_power_uav, air_to_air=True)
    # iot 0 sends both packets on one link, uav 0 relays both to uav 1
    d_i0 = 12000.0 / r_i0
    d_uu = 12000.0 / r_uu
    proc = (1.0 + 2.0 + 3.0) / 2.0
    expected = [d_i0 + d_uu + proc, d_i0 + d_uu + proc, 8000.0 / r_i1 + proc]
    np.testing.assert_allclose(rep.task_delays, expected, rtol=1e-12)
    assert rep.node_delays[uav(1)] == pytest.approx(3.0)
    assert rep.num_violations == 0
    # halving the capacity pushes every task past its 5 s deadline
    rep2 = compute_delays(a, topo, CH, uav_capacity=1.0, mec_capacity=10.0)
    assert rep2.num_violations == 3


def test_fdma_split_divides_rate():
    topo = two_uav_topology()
    # uav 0 relays to uav 1 and nothing else; a second outgoing link only
    # appears when tasks go two ways, so build that assignment by hand
    t0 = task(0)
    a = Assignment(0, np.array([0, 1], dtype=np.int8), [t0, t0],
                   [[(iot(0), uav(0)), (uav(0), uav(1))], [(iot(0), uav(0)), (uav(0), MEC)]],
                   [[uav(1)], [MEC]])
    split = edge_rates(a, topo, CH, fdma_split=True)
    full = edge_rates(a, topo, CH, fdma_split=False)
    assert split[(uav(0), uav(1))] == pytest.approx(full[(uav(0), uav(1))] / 2)
    assert split[(iot(0), uav(0))] == pytest.approx(full[(iot(0), uav(0))])
    assert full[(uav(0), MEC)] == full_band_rate(topo, CH, uav(0), MEC, 0)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 12))
def test_route_output_is_feasible(seed, J, I):
    rng = np.random.default_rng(seed)
    c = ScenarioConfig(num_iot=I, num_uav=J, num_intervals=2, max_tasks_per_interval=3)
    topo = build_topology(c)
    tasks = tasks_by_interval(generate_tasks(c, seed), 2)
    for t in range(2):
        x = rng.integers(0, 2, size=J)
        a = route_tasks(tasks[t], topo, x, t, max_relay_hops=int(rng.integers(0, 2)))
        assert validate_assignment(a) == []
        for k in range(len(a.tasks)):
            assert check_flow_conservation(a, k)
            (v,) = a.placements[k]
            assert v == MEC or x[v.index] == 1


def test_literal_mec_sink_reading():
    topo = two_uav_topology()
    a = route_tasks([task(0), task(1)], topo, [1, 0], 0)
    assert check_flow_conservation(a, 0) and check_flow_conservation(a, 1)
    # under the MEC-sink reading only flows that end at the MEC conserve
    b = route_tasks([task(0)], topo, [0, 0], 0)
    assert check_flow_conservation(b, 0, literal_mec_sink=True)
    assert not check_flow_conservation(a, 0, literal_mec_sink=True)


def test_broken_assignments_detected():
    t0 = task(0)
    x = np.array([0, 1], dtype=np.int8)
    loop = Assignment(0, x, [t0], [[(iot(0), uav(0)), (uav(0), uav(1)), (uav(1), uav(0))]], [[uav(1)]])
    assert not check_flow_conservation(loop, 0)
    dup = Assignment(0, x, [t0], [[(iot(0), uav(0)), (iot(0), uav(0))]], [[uav(0)]])
    assert not check_flow_conservation(dup, 0)
    two = Assignment(0, x, [t0], [[(iot(0), uav(1))]], [[uav(1), MEC]])
    assert any("single placement" in p for p in validate_assignment(two))
    idle = Assignment(0, x, [t0], [[(iot(0), uav(0))]], [[uav(0)]])
    assert any("activation" in p for p in validate_assignment(idle))
    lost = Assignment(0, x, [t0], [[(iot(0), uav(0))]], [[uav(1)]])
    assert any("reachability" in p for p in validate_assignment(lost))


def test_default_scenario_h_fc_delays_are_positive():
    c = ScenarioConfig()
    topo = build_topology(c)
    tasks = tasks_by_interval(generate_tasks(c, 0), c.num_intervals)[0]
    a = route_tasks(tasks, topo, np.ones(8), 0)
    rep = compute_delays(a, topo, c.channel, c.uav_capacity, c.mec_capacity)
    assert (rep.task_delays > 0).all()
    assert len(rep.task_delays) == len(tasks)
