"""Air-to-ground and air-to-air link model.

LoS probability from the elevation angle, free-space path loss mixed with
LoS/NLoS excess losses, Shannon rate over an FDMA channel and the resulting
per-packet link delay. Everything here is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

SPEED_OF_LIGHT = 299_792_458.0


class DegenerateGeometryError(ValueError):
    """Two link endpoints coincide."""


class UnreachableLinkError(ValueError):
    """A link has zero (or negative) capacity."""


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"altitude must be non-negative, got {self.z}")

    def distance(self, other: "Position") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )


@dataclass(frozen=True)
class ChannelParams:
    """Propagation constants. Defaults are suburban (a, b, fc) plus link-budget
    values the model needs but that have to be chosen (losses, noise, powers)."""

    a: float = 4.88
    b: float = 0.43
    fc: float = 2e9
    c: float = SPEED_OF_LIGHT
    eta_los: float = 0.1
    eta_nlos: float = 21.0
    noise_power: float = 1e-13
    bandwidth: float = 1e6
    tx_power_iot: float = 0.1
    tx_power_uav: float = 0.5

    def __post_init__(self):
        for name in ("a", "b", "fc", "c", "bandwidth", "noise_power", "tx_power_iot", "tx_power_uav"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not (self.eta_nlos >= self.eta_los >= 0):
            raise ValueError("need eta_nlos >= eta_los >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def elevation_angle(src: Position, dst: Position) -> float:
    """Angle in degrees between the ground plane and the src-dst line."""
    horizontal = math.hypot(dst.x - src.x, dst.y - src.y)
    vertical = abs(dst.z - src.z)
    if horizontal == 0.0 and vertical == 0.0:
        raise DegenerateGeometryError(f"coincident endpoints {src}")
    return math.degrees(math.atan2(vertical, horizontal))


def los_probability(theta: float, params: ChannelParams) -> float:
    return 1.0 / (1.0 + params.a * math.exp(-params.b * (theta - params.a)))


def free_space_loss_db(distance: float, params: ChannelParams) -> float:
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return 20.0 * math.log10(4.0 * math.pi * params.fc * distance / params.c)


def path_loss_db(distance: float, p_los: float, params: ChannelParams) -> float:
    """Mean path loss in dB: free space plus the LoS/NLoS-weighted excess."""
    return (
        free_space_loss_db(distance, params)
        + p_los * params.eta_los
        + (1.0 - p_los) * params.eta_nlos
    )


def data_rate(loss_db: float, tx_power: float, params: ChannelParams, bandwidth: float | None = None) -> float:
    """Shannon rate in bit/s. The dB loss becomes a linear gain 10^(-L/10)
    before entering the SNR."""
    bw = params.bandwidth if bandwidth is None else bandwidth
    gain = 10.0 ** (-loss_db / 10.0)
    return bw * math.log2(1.0 + tx_power * gain / params.noise_power)


def link_delay(packet_bits: float, rate: float) -> float:
    if rate <= 0:
        raise UnreachableLinkError(f"link rate {rate} is not positive")
    return packet_bits / rate


def link_rate(
    src: Position,
    dst: Position,
    params: ChannelParams,
    *,
    tx_power: float,
    air_to_air: bool = False,
    bandwidth: float | None = None,
) -> float:
    """Rate of the src->dst link. Air-to-air links are always LoS."""
    if air_to_air:
        p_los = 1.0
    else:
        p_los = los_probability(elevation_angle(src, dst), params)
    loss = path_loss_db(src.distance(dst), p_los, params)
    return data_rate(loss, tx_power, params, bandwidth)
