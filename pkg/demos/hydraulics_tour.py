"""
Steady-state hydraulics of a looped network
===========================================

Solve the two-loop network for one design, look at heads and flows, and
check the two conservation laws the solver is built on.
"""

import numpy as np

from mopsoplus import WDSProblem, load_network, solve_steady_state
from mopsoplus.hydraulics import headloss_hw, mass_balance_residual

# A well-known least-cost design for the two-loop network, in mm.
net = load_network("TLN")
table = [d.diameter_mm for d in net.diameter_table]
design_mm = [457.2, 254.0, 406.4, 101.6, 406.4, 254.0, 254.0, 25.4]
decision = [table.index(d) + 1 for d in design_mm]

state = solve_steady_state(net, decision)
print(f"converged in {state.iterations} iterations")
for j, h in zip(net.junctions, state.junction_heads):
    print(f"  node {j.id}: head {h:8.3f} m  (required {j.elevation + j.min_head:.1f} m)")

# Flow into every junction equals its demand.
print("mass balance residual:", mass_balance_residual(net, state))

# Headloss along each pipe equals the head drop between its ends.
ids = [j.id for j in net.junctions] + [r.id for r in net.reservoirs]
worst = 0.0
for k, p in enumerate(net.pipes):
    drop = state.heads[ids.index(p.start)] - state.heads[ids.index(p.end)]
    h = headloss_hw(p.length, state.diameters[k], p.roughness, state.flows[k])
    worst = max(worst, abs(drop - h))
print(f"largest pipe energy mismatch: {worst:.2e} m")

# The objectives of the same design.
problem = WDSProblem(net)
s = problem.solution(decision)
print(f"cost {s.objectives.cost:.3f} M, resilience {s.objectives.resilience:.4f}, feasible {s.feasible}")

# Batches of designs are solved together; here 1000 random ones.
rng = np.random.default_rng(0)
batch = rng.integers(1, net.n_dia + 1, size=(1000, net.n_pipes))
sols = problem.evaluate_many(batch)
print(f"{sum(s.feasible for s in sols)} of 1000 random designs meet every pressure")
