import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from uavoffload.channel import (ChannelParams, DegenerateGeometryError, Position, UnreachableLinkError,
                                data_rate, elevation_angle, free_space_loss_db, link_delay, link_rate,
                                los_probability, path_loss_db)

P = ChannelParams()
angles = st.floats(0.0, 90.0)


def test_elevation_vertical_and_unit_slope():
    assert elevation_angle(Position(0, 0, 0), Position(0, 0, 5)) == pytest.approx(90.0)
    assert elevation_angle(Position(0, 0, 0), Position(5, 0, 5)) == pytest.approx(45.0)


def test_elevation_half_slope():
    # atan(0.5) in degrees, 30-digit evaluation
    assert elevation_angle(Position(0, 0, 0), Position(10, 0, 5)) == pytest.approx(26.5650511770779893, abs=1e-12)


def test_elevation_is_symmetric_in_endpoints():
    a, b = Position(3, 4, 0), Position(10, -2, 7)
    assert elevation_angle(a, b) == pytest.approx(elevation_angle(b, a))


def test_coincident_endpoints_rejected():
    with pytest.raises(DegenerateGeometryError):
        elevation_angle(Position(1, 2, 3), Position(1, 2, 3))


def test_negative_altitude_rejected():
    with pytest.raises(ValueError):
        Position(0, 0, -1)


def test_los_at_theta_equal_a():
    assert los_probability(4.88, P) == pytest.approx(1 / 5.88, abs=1e-15)
    assert los_probability(4.88, P) == pytest.approx(0.17007, abs=5e-6)


def test_los_limits():
    assert los_probability(90.0, P) == pytest.approx(1.0, abs=1e-12)
    # 1 - 4.88 exp(-0.43 * 40.12), 30-digit evaluation
    assert los_probability(45.0, P) == pytest.approx(0.999999842911255111, abs=1e-15)
    assert 1 - los_probability(45.0, P) == pytest.approx(1.6e-7, rel=0.05)
    assert los_probability(0.0, P) == pytest.approx(0.0245174964659864456, abs=1e-15)


@given(angles, angles)
def test_los_monotone(t1, t2):
    lo, hi = sorted((t1, t2))
    assert los_probability(lo, P) <= los_probability(hi, P)
    assert 0.0 < los_probability(lo, P) < 1.0 or lo > 80


def test_free_space_term_at_100m():
    # 20 log10(4 pi 2e9 100 / 299792458), 30-digit evaluation
    assert free_space_loss_db(100.0, P) == pytest.approx(78.4683831351629977, abs=1e-10)
    assert path_loss_db(100.0, 1.0, P) == pytest.approx(78.56, abs=0.01)
    # the rounded value also holds with c = 3e8
    approx_c = ChannelParams(c=3e8)
    assert path_loss_db(100.0, 1.0, approx_c) == pytest.approx(78.56, abs=0.01)


def test_free_space_term_vanishes_at_reference_distance():
    d = P.c / (4 * math.pi * P.fc)
    assert free_space_loss_db(d, P) == pytest.approx(0.0, abs=1e-12)


def test_los_nlos_gap():
    assert path_loss_db(50.0, 0.0, P) - path_loss_db(50.0, 1.0, P) == pytest.approx(P.eta_nlos - P.eta_los)


def test_path_loss_domain():
    for d in (0.0, -3.0):
        with pytest.raises(ValueError):
            path_loss_db(d, 0.5, P)


@given(st.floats(0.1, 1e5), st.floats(0.1, 1e5), st.floats(0.0, 1.0))
def test_path_loss_increasing_in_distance(d1, d2, p):
    if d1 == d2:
        return
    lo, hi = sorted((d1, d2))
    assert path_loss_db(lo, p, P) < path_loss_db(hi, p, P)


def test_rate_power_of_two_snr():
    # P g / sigma^2 = 1023 gives log2(1024) = 10 bits per Hz
    params = ChannelParams(noise_power=1.0)
    loss = -10 * math.log10(1023.0)
    assert data_rate(loss, 1.0, params) == pytest.approx(1e7, rel=1e-12)


def test_rate_reference_value():
    # B log2(1 + 0.1 * 10^(-7.856) / 1e-13), 30-digit evaluation
    assert data_rate(78.56, 0.1, P) == pytest.approx(13766173.5773232579, rel=1e-12)


def test_rate_vanishes_with_loss():
    assert data_rate(1e4, 0.1, P) == pytest.approx(0.0, abs=1e-9)


@given(st.floats(-50, 300), st.floats(-50, 300))
def test_rate_decreasing_in_loss(l1, l2):
    lo, hi = sorted((l1, l2))
    assert data_rate(lo, 0.1, P) >= data_rate(hi, 0.1, P)


def test_link_delay():
    assert link_delay(262144, 1e7) == pytest.approx(0.0262144, rel=1e-15)
    assert link_delay(0, 1e7) == 0.0
    assert link_delay(1000, 2e6) == pytest.approx(link_delay(1000, 1e6) / 2)
    for r in (0.0, -1.0):
        with pytest.raises(UnreachableLinkError):
            link_delay(100, r)


def test_air_to_air_is_los():
    a, b = Position(0, 0, 5), Position(120, 30, 5)
    expected = data_rate(path_loss_db(a.distance(b), 1.0, P), P.tx_power_uav, P)
    assert link_rate(a, b, P, tx_power=P.tx_power_uav, air_to_air=True) == pytest.approx(expected, rel=1e-15)
    # horizontal link seen as air-to-ground has theta = 0 and mostly NLoS
    assert link_rate(a, b, P, tx_power=P.tx_power_uav) < expected


@given(st.floats(-200, 200), st.floats(-200, 200), st.floats(1, 100))
def test_uav_power_beats_iot_power(x, y, z):
    g, u = Position(0, 0, 0), Position(x, y, z)
    assert link_rate(g, u, P, tx_power=P.tx_power_uav) >= link_rate(g, u, P, tx_power=P.tx_power_iot)


@pytest.mark.parametrize("bad", [dict(a=0), dict(b=-1), dict(fc=0), dict(bandwidth=0), dict(noise_power=0),
                                 dict(eta_los=5, eta_nlos=1), dict(eta_los=-1)])
def test_params_validated(bad):
    with pytest.raises(ValueError):
        ChannelParams(**bad)
