"""
Checking the optimiser against an exhaustive search
===================================================

Restricting each of the eight pipes of the two-loop network to four
diameters leaves 65,536 designs, few enough to enumerate.  The swarm with
local search should find the exact front.
"""

import time

from mopsoplus import LSConfig, SwarmConfig, compare, enumerate_bruteforce, reduced_tln, run_many

problem = reduced_tln()
print("diameters kept (mm):", [d.diameter_mm for d in problem.network.diameter_table])

t = time.perf_counter()
true_front = enumerate_bruteforce(problem)
print(f"true front: {len(true_front)} designs ({time.perf_counter() - t:.1f} s)")

cfg = SwarmConfig(
    n_particles=100,
    n_iterations=300,
    seed=7,
    ls=LSConfig(start=50, switch=200, period_early=10, period_late=50),
)
t = time.perf_counter()
found, stats = run_many(problem, cfg, n_runs=3)
print(f"swarm: {len(found)} designs from {sum(s.n_fe for s in stats)} evaluations "
      f"({time.perf_counter() - t:.1f} s)")

res = compare(true_front, found)
print(f"true designs missed: {res.a.n_unique}, spurious designs: {res.b.n_unique}, "
      f"shared: {res.n_common}")
