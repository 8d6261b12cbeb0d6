"""Exhaustive search on an instance small enough to enumerate.

Two UAV-Cs over four intervals give 256 activation schedules. Each one is
scored by the simulator and again by an independent scorer, and the two must
agree. The table shows the best schedules alongside the two heuristics.
"""
import numpy as np

from uavoffload.oracle import enumerate_optimal, schedule_objective, tiny_instance

instance = tiny_instance(0)
result = enumerate_optimal(instance)

order = np.argsort(-result.scores, kind="stable")
rows = result.table_rows()
print("best schedules (bits are interval-major, UAV-C 0 first):")
for k in order[:5]:
    r = rows[k]
    print(f"  {r['schedule']}  misses {r['violations']:>2}  lowest battery {r['min_remaining_energy']:5.1f}  "
          f"objective {r['objective']:.5f}")

T, J = result.shape
all_on = np.ones((T, J), dtype=np.int8)
rr = np.array([[1 if j == t % J else 0 for j in range(J)] for t in range(T)], dtype=np.int8)
print(f"\noptimum      {result.objective:.5f}")
print(f"all on       {schedule_objective(instance, all_on):.5f}")
print(f"round robin  {schedule_objective(instance, rr):.5f}")
print(f"all off      {result.scores[0]:.5f}")
