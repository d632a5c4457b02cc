"""
Does local search help on a larger network?
===========================================

On the 34-pipe Hanoi network, run the swarm once with partial local search
and once without, giving the run without it at least as many evaluations.
Then compare the fronts.  One seed takes under a minute.
"""

import math

from mopsoplus import LSConfig, MutationSchedule, SwarmConfig, WDSProblem, compare, load_network, run_single

problem = WDSProblem(load_network("HAN"))
mutation = MutationSchedule("periodic", 1.0, width=20, period=200, start=200)
ls = LSConfig(start=1000, switch=2000, period_early=250, period_late=1000, max_explored=100)

with_ls, s_on = run_single(problem, SwarmConfig(n_particles=50, n_iterations=2000, seed=0,
                                                mutation=mutation, ls=ls))
iters = math.ceil(s_on.n_fe / 50) - 1
without, s_off = run_single(problem, SwarmConfig(n_particles=50, n_iterations=iters, seed=0,
                                                 mutation=mutation))
print(f"with LS:    {len(with_ls)} designs, {s_on.n_fe} evaluations ({s_on.n_fe_ls} in LS)")
print(f"without LS: {len(without)} designs, {s_off.n_fe} evaluations")

res = compare(with_ls, without)
print(f"unique to the LS run: {res.a.n_unique}, unique to the plain run: {res.b.n_unique}")

# Front size over the run; local search events show up as jumps.
for t, size in s_on.pf_size_trace[::250]:
    print(f"  iteration {t:5d}: {size} designs")
