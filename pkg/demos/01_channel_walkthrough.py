"""How link quality falls off with distance and elevation.

An IoT device on the ground talks to a UAV-C hovering 5 m up. Near the
device the elevation is steep, the link is almost surely line of sight and
the rate is high. Walking away flattens the angle, the NLoS excess takes
over and the rate drops. UAV-to-UAV links skip the elevation model.
"""
from uavoffload.channel import (ChannelParams, Position, elevation_angle, link_rate, los_probability,
                                path_loss_db)

params = ChannelParams()
uav = Position(0.0, 0.0, 5.0)

print(f"{'distance m':>10} {'angle deg':>9} {'p_LoS':>7} {'loss dB':>8} {'rate Mb/s':>9}")
for d in (1, 5, 10, 25, 50, 100, 200, 400):
    device = Position(float(d), 0.0, 0.0)
    theta = elevation_angle(device, uav)
    p = los_probability(theta, params)
    loss = path_loss_db(device.distance(uav), p, params)
    rate = link_rate(device, uav, params, tx_power=params.tx_power_iot)
    print(f"{d:>10} {theta:>9.2f} {p:>7.3f} {loss:>8.2f} {rate / 1e6:>9.3f}")

# two UAV-Cs at the same altitude: always line of sight, stronger radio
other = Position(100.0, 0.0, 5.0)
air = link_rate(uav, other, params, tx_power=params.tx_power_uav, air_to_air=True)
ground = link_rate(Position(100.0, 0.0, 0.0), uav, params, tx_power=params.tx_power_iot)
print(f"\n100 m air-to-air link: {air / 1e6:.3f} Mb/s versus {ground / 1e6:.3f} Mb/s from the ground")

# splitting the band between two outgoing links halves each share
half = link_rate(uav, other, params, tx_power=params.tx_power_uav, air_to_air=True,
                 bandwidth=params.bandwidth / 2)
print(f"with the band shared by two links: {half / 1e6:.3f} Mb/s each")
