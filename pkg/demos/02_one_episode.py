"""One mission under the two heuristics, interval by interval.

Full-time computing keeps every UAV-C busy, so deadlines are rarely missed
but batteries drain evenly and fast. Round robin wakes a single UAV-C per
interval: batteries last, and the rest of the work is relayed to the one
awake UAV-C or falls back to the MEC, where it queues and misses deadlines.
"""
import numpy as np

from uavoffload.routing import compute_delays, route_tasks
from uavoffload.rl import OffloadEnv, hfc_policy, hrr_policy
from uavoffload.scenario import ScenarioConfig, build_topology, generate_tasks, tasks_by_interval

config = ScenarioConfig()
topology = build_topology(config)
tasks = generate_tasks(config, 0)
print(f"{config.num_iot} IoT devices, {config.num_uav} UAV-Cs, {config.num_intervals} intervals, "
      f"{len(tasks)} tasks in this workload\n")

# where the first interval's tasks go when only UAV-C 0 is awake
first = tasks_by_interval(tasks, config.num_intervals)[0]
x = np.zeros(config.num_uav, dtype=np.int8)
x[0] = 1
assignment = route_tasks(first, topology, x, 0)
report = compute_delays(assignment, topology, config.channel, config.uav_capacity, config.mec_capacity)
for k in range(min(6, len(first))):
    hops = " -> ".join(f"{v.kind}{v.index if v.kind != 'mec' else ''}" for v in assignment.path(k))
    flag = "late" if report.violations[k] else "ok"
    print(f"task {k}: {hops:<24} delay {report.task_delays[k]:7.3f} s  deadline {first[k].deadline:4.1f} s  {flag}")

print()
for name, policy in (("full-time", hfc_policy), ("round robin", hrr_policy)):
    res = OffloadEnv(config, topology).run(policy, tasks)
    misses = ", ".join(str(int(v)) for v in res.violations_per_interval)
    print(f"{name:>11}: misses per interval [{misses}]")
    print(f"{'':>11}  total {res.violations}/{res.num_tasks}, lowest battery {res.min_remaining:.0f} Wh, "
          f"objective {res.objective:.4f}")
