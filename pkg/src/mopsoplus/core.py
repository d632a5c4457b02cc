"""Solutions, Pareto dominance and non-dominated set maintenance.

Every solution carries two objectives: the first (``resilience``) is
maximised and the second (``cost``) is minimised.  Problems whose native
objectives have other senses map onto this convention before returning.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Sequence


class ObjectivePair(NamedTuple):
    resilience: float
    cost: float


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    deficit: float = 0.0

    def __post_init__(self):
        if self.deficit < 0 or math.isnan(self.deficit):
            raise ValueError(f"deficit must be nonnegative, got {self.deficit}")
        if self.feasible != (self.deficit == 0.0):
            raise ValueError("feasible must hold exactly when deficit == 0")

    @classmethod
    def from_deficit(cls, deficit: float) -> "Feasibility":
        deficit = float(deficit)
        return cls(deficit == 0.0, deficit)


FEASIBLE = Feasibility(True, 0.0)


@dataclass(frozen=True)
class Solution:
    """An evaluated decision vector (diameter indices, 1-based)."""

    decision: tuple[int, ...]
    objectives: ObjectivePair
    feasibility: Feasibility = FEASIBLE

    def __post_init__(self):
        r, c = self.objectives
        if not (math.isfinite(r) and math.isfinite(c)):
            raise ValueError(f"objectives must be finite, got {self.objectives}")

    @property
    def feasible(self) -> bool:
        return self.feasibility.feasible

    @property
    def deficit(self) -> float:
        return self.feasibility.deficit


def dominates(a: ObjectivePair, b: ObjectivePair) -> bool:
    """True if ``a`` is no worse than ``b`` in both objectives and better in one."""
    return a[0] >= b[0] and a[1] <= b[1] and (a[0] > b[0] or a[1] < b[1])


def constrained_dominates(a: Solution, b: Solution) -> bool:
    """Feasibility-first dominance.

    A feasible solution beats an infeasible one; two infeasible solutions are
    ranked by total pressure deficit; two feasible ones by :func:`dominates`.
    """
    fa, fb = a.feasibility.feasible, b.feasibility.feasible
    if fa and fb:
        return dominates(a.objectives, b.objectives)
    if fa != fb:
        return fa
    return a.feasibility.deficit < b.feasibility.deficit


class InsertOutcome(Enum):
    ACCEPTED_NEW = "accepted_new"
    ACCEPTED_REPLACING = "accepted_replacing"
    REJECTED_DOMINATED = "rejected_dominated"
    REJECTED_DUPLICATE = "rejected_duplicate"

    @property
    def accepted(self) -> bool:
        return self in (InsertOutcome.ACCEPTED_NEW, InsertOutcome.ACCEPTED_REPLACING)


class InsertResult(NamedTuple):
    outcome: InsertOutcome
    removed: tuple[Solution, ...] = ()


class NDSet:
    """Mutually non-dominated solutions under constrained dominance.

    While at least one feasible solution is known the set holds only feasible
    members, kept as a staircase sorted by ascending cost (and therefore
    strictly ascending resilience).  Before that it holds the infeasible
    solutions sharing the smallest deficit seen so far.

    Solutions with bitwise-identical objectives (and deficit) collapse to the
    first one inserted.
    """

    def __init__(self, solutions: Iterable[Solution] = ()):
        self._costs: list[float] = []
        self._res: list[float] = []
        self._members: list[Solution] = []
        self._infeasible: dict[ObjectivePair, Solution] = {}
        self._min_deficit = math.inf
        for s in solutions:
            self.insert(s)

    # -- queries ---------------------------------------------------------
    def __len__(self) -> int:
        return len(self._members) if self._members else len(self._infeasible)

    def __iter__(self) -> Iterator[Solution]:
        if self._members:
            return iter(list(self._members))
        return iter(list(self._infeasible.values()))

    def __contains__(self, s: Solution) -> bool:
        return any(m is s for m in self)

    def __repr__(self) -> str:
        return f"NDSet({len(self)} members, feasible={self.has_feasible})"

    @property
    def has_feasible(self) -> bool:
        return bool(self._members)

    def solutions(self) -> list[Solution]:
        """Members; feasible fronts are ordered by ascending cost."""
        return list(self)

    def objective_set(self) -> set[ObjectivePair]:
        return {s.objectives for s in self}

    def copy(self) -> "NDSet":
        new = NDSet()
        new._costs = list(self._costs)
        new._res = list(self._res)
        new._members = list(self._members)
        new._infeasible = dict(self._infeasible)
        new._min_deficit = self._min_deficit
        return new

    def is_dominated(self, s: Solution) -> bool:
        """True if some member constrained-dominates ``s``."""
        if not s.feasible:
            return self.has_feasible or s.deficit > self._min_deficit
        if not self._members:
            return False
        r, c = s.objectives
        i = bisect_right(self._costs, c) - 1
        if i < 0:
            return False
        pr, pc = self._res[i], self._costs[i]
        return pr > r or (pr == r and pc < c)

    # -- mutation --------------------------------------------------------
    def insert(self, s: Solution) -> InsertResult:
        if s.feasible:
            return self._insert_feasible(s)
        return self._insert_infeasible(s)

    def update(self, candidates: Iterable[Solution]) -> list[InsertResult]:
        return [self.insert(s) for s in candidates]

    def _insert_feasible(self, s: Solution) -> InsertResult:
        r, c = s.objectives
        costs, res = self._costs, self._res
        i = bisect_right(costs, c) - 1
        if i >= 0:
            pr, pc = res[i], costs[i]
            if pr == r and pc == c:
                return InsertResult(InsertOutcome.REJECTED_DUPLICATE)
            if pr >= r:
                return InsertResult(InsertOutcome.REJECTED_DOMINATED)
        # members with cost >= c and resilience <= r are dominated by s
        lo = bisect_left(costs, c)
        hi = lo
        while hi < len(costs) and res[hi] <= r:
            hi += 1
        removed = tuple(self._members[lo:hi])
        del costs[lo:hi], res[lo:hi], self._members[lo:hi]
        costs.insert(lo, c)
        res.insert(lo, r)
        self._members.insert(lo, s)
        if self._infeasible:
            removed = removed + tuple(self._infeasible.values())
            self._infeasible.clear()
        self._min_deficit = 0.0
        if removed:
            return InsertResult(InsertOutcome.ACCEPTED_REPLACING, removed)
        return InsertResult(InsertOutcome.ACCEPTED_NEW)

    def _insert_infeasible(self, s: Solution) -> InsertResult:
        if self._members or s.deficit > self._min_deficit:
            return InsertResult(InsertOutcome.REJECTED_DOMINATED)
        if s.deficit < self._min_deficit:
            removed = tuple(self._infeasible.values())
            self._infeasible = {s.objectives: s}
            self._min_deficit = s.deficit
            if removed:
                return InsertResult(InsertOutcome.ACCEPTED_REPLACING, removed)
            return InsertResult(InsertOutcome.ACCEPTED_NEW)
        if s.objectives in self._infeasible:
            return InsertResult(InsertOutcome.REJECTED_DUPLICATE)
        self._infeasible[s.objectives] = s
        return InsertResult(InsertOutcome.ACCEPTED_NEW)


def update_nd_set(ndset: NDSet, candidates: Sequence[Solution]) -> NDSet:
    """Return the non-dominated subset of ``ndset`` plus ``candidates``.

    ``ndset`` itself is left untouched.
    """
    out = ndset.copy()
    out.update(candidates)
    return out
