"""Train the graph policy briefly, then sweep UAV-C capacity.

A short run on a shorter mission keeps this to seconds on one core.
The graph network takes the whole topology as input, so the same weights
also drive a fleet that has lost a UAV-C. The dense baseline is padded to
its fixed input instead.
"""
import time

from uavoffload.experiments import SweepSpec, run_sweep, seed_mean
from uavoffload.gnn import ChainConfig
from uavoffload.rl import TrainConfig, train
from uavoffload.scenario import ScenarioConfig

config = ScenarioConfig(num_intervals=8)
episodes = 60
tc = TrainConfig(episodes=episodes, batch_size=32, replay_capacity=2000,
                 epsilon_decay=0.05 ** (1 / (0.7 * episodes)), rng_seed=0)

networks = {}
for kind in ("gnn", "dqn"):
    t0 = time.time()
    net, log = train(config, tc, kind, ChainConfig(hidden=(32,), latent=16))
    networks[kind] = net
    last = log.rows[-1]
    print(f"{kind}: {episodes} episodes in {time.time() - t0:.0f} s, final episode reward "
          f"{last['total_reward']:.3f}, {last['violations']} misses")

policies = ["gnn", "dqn", "hfc", "hrr"]
seeds = [0, 1, 2]
rows = run_sweep(SweepSpec("capacity", [0.5, 1.0, 2.0], seeds, policies), config, networks)
print("\nmean deadline misses by capacity multiplier")
for p in policies:
    means = seed_mean(rows, p, "violations")
    print(f"  {p:>4}: " + "  ".join(f"x{k:g}: {v:6.1f}" for k, v in means.items()))

rows = run_sweep(SweepSpec("uav_failure", [0, 1], seeds, policies), config, networks)
print("\nmean objective with 0 and 1 UAV-C removed")
for p in policies:
    means = seed_mean(rows, p, "objective")
    print(f"  {p:>4}: " + "  ".join(f"{int(k)} lost: {v:7.4f}" for k, v in means.items()))
