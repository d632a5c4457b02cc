"""
Comparing two fronts
====================

Two fronts are merged into one non-dominated set.  Each input member is then
unique (kept, no twin on the other side), common (kept, with a twin) or
rejected (beaten by a member of the other front).
"""

from mopsoplus import TABLE_COLUMNS, compare, front_from_points

a = front_from_points([(0.1, 1.0), (0.3, 2.0), (0.6, 4.0), (0.8, 6.0)])
b = front_from_points([(0.1, 1.0), (0.4, 2.0), (0.5, 3.0), (0.7, 6.5), (0.9, 7.0)])

res = compare(a, b)
for name, value in zip(TABLE_COLUMNS, res.table_row()):
    print(f"{name:6s} {value}")
print("combined front:", [(s.objectives.resilience, s.objectives.cost) for s in res.combined])

# (0.3, 2.0) in A loses to (0.4, 2.0) in B, and (0.7, 6.5) in B loses to
# (0.8, 6.0) in A; (0.1, 1.0) appears in both.
assert res.a.n_rejected == 1 and res.b.n_rejected == 1 and res.n_common == 1
