"""
Neighbourhood local search on a small two-variable problem
==========================================================

A unit local search visits the ±1 neighbours of every member of a
non-dominated set, evaluates the unseen ones together, and merges them back.
Repeating it walks the set towards the true front.
"""

from mopsoplus import KitaProblem, NDSet
from mopsoplus.localsearch import LSConfig, VisitedTrie, repeated_local_search, unit_local_search

problem = KitaProblem()
start = NDSet(problem.evaluate_many([(44, 34), (30, 7), (5, 18)]))
print("start:", sorted(s.decision for s in start))

# One pass: every neighbour is evaluated before the set is updated.
trie = VisitedTrie()
after, rep = unit_local_search(start, problem, trie)
print("after one pass:", sorted(s.decision for s in after))
print(f"accepted {rep.n_accepted}, rejected {rep.n_rejected}, evaluated {rep.n_evaluated}")

# Repeat until a pass adds nothing.  The visited trie stops any point from
# being evaluated twice.
front, reports = repeated_local_search(start, problem, VisitedTrie(), LSConfig(max_repeats=200))
print(f"{len(reports)} passes, {sum(r.n_evaluated for r in reports)} evaluations")
print(f"final set of {len(front)} members, all feasible: {all(s.feasible for s in front)}")
# Both original objectives are maximised; the second is stored negated as a cost.
for s in sorted(front, key=lambda s: s.objectives.cost)[:5]:
    print(f"   grid point {s.decision}  f1={s.objectives.resilience:.4f}  f2={-s.objectives.cost:.4f}")
