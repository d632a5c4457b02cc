"""Neighbourhood local search around the current ND set.

Neighbours differ by ±1 in one diameter index.  A unit local search (ULS)
collects the neighbours of every selected ND solution first, evaluates the
ones not seen before, and only then updates the ND set, so no solution is
dropped before its neighbourhood has been explored.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import NDSet, Solution, update_nd_set


@dataclass(frozen=True)
class LSConfig:
    """Two-stage local search schedule.

    LS runs every ``period_early`` iterations from ``start`` to ``switch``
    (inclusive) and every ``period_late`` iterations after ``switch``.  Each LS
    event repeats the ULS up to ``max_repeats`` times.  ``max_explored``
    switches to partial LS: a random subset of that many ND solutions is
    explored, once per event.
    """

    enabled: bool = True
    start: int = 1000
    switch: int = 5000
    period_early: int = 100
    period_late: int = 1000
    max_repeats: int = 50
    max_explored: int | None = None

    def __post_init__(self):
        if self.start > self.switch:
            raise ValueError("LS start must not come after the stage switch")
        if self.period_early < 1 or self.period_late < 1:
            raise ValueError("LS periods must be >= 1")
        if self.max_repeats < 1:
            raise ValueError("max_repeats must be >= 1")
        if self.max_explored is not None and self.max_explored < 1:
            raise ValueError("max_explored must be >= 1 when given")


LS_OFF = LSConfig(enabled=False)


def ls_due(t: int, cfg: LSConfig) -> bool:
    if not cfg.enabled:
        return False
    if cfg.start <= t <= cfg.switch:
        return (t - cfg.start) % cfg.period_early == 0
    if t > cfg.switch:
        return (t - cfg.switch) % cfg.period_late == 0
    return False


class VisitedTrie:
    """Level-per-variable tree of decision vectors already evaluated.

    Children are keyed by the value of the next variable.  A branch that only
    one stored vector passes through is kept as the tuple of its remaining
    values and split into nodes when a second vector diverges from it.
    """

    __slots__ = ("_root", "_size", "_depth")

    def __init__(self):
        self._root: dict = {}
        self._size = 0
        self._depth: int | None = None

    def __len__(self) -> int:
        return self._size

    def _check(self, key: tuple) -> None:
        if self._depth is None:
            self._depth = len(key)
        elif len(key) != self._depth:
            raise ValueError(f"expected decision of length {self._depth}, got {len(key)}")

    def insert(self, decision: Sequence[int]) -> bool:
        """Store ``decision``; return True if it was not already present."""
        key = tuple(int(v) for v in decision)
        self._check(key)
        node = self._root
        n = len(key)
        i = 0
        while True:
            v = key[i]
            child = node.get(v)
            if child is None:
                node[v] = key[i + 1:]
                self._size += 1
                return True
            if type(child) is tuple:
                rest = key[i + 1:]
                if child == rest:
                    return False
                # diverges below this level: expand the compressed branch by one node
                expanded = {child[0]: child[1:]}
                node[v] = expanded
                child = expanded
            node = child
            i += 1
            if i == n:  # unreachable for equal-length keys
                return False

    def __contains__(self, decision: Sequence[int]) -> bool:
        key = tuple(int(v) for v in decision)
        if self._depth is not None and len(key) != self._depth:
            return False
        node = self._root
        for i, v in enumerate(key):
            child = node.get(v)
            if child is None:
                return False
            if type(child) is tuple:
                return child == key[i + 1:]
            node = child
        return False

    def clear(self) -> None:
        self._root = {}
        self._size = 0
        self._depth = None


def trie_insert(trie: VisitedTrie, decision) -> bool:
    return trie.insert(decision)


def trie_contains(trie: VisitedTrie, decision) -> bool:
    return decision in trie


class ULSReport(NamedTuple):
    n_accepted: int
    n_rejected: int
    n_evaluated: int
    pf_size_after: int


def neighbors(decision: Sequence[int], upper) -> list[tuple[int, ...]]:
    """All vectors differing by ±1 in one position and staying in range."""
    d = tuple(int(v) for v in decision)
    ub = np.broadcast_to(np.asarray(upper), (len(d),))
    out = []
    for k, v in enumerate(d):
        if v - 1 >= 1:
            out.append(d[:k] + (v - 1,) + d[k + 1:])
        if v + 1 <= ub[k]:
            out.append(d[:k] + (v + 1,) + d[k + 1:])
    return out


def unit_local_search(
    ndset: NDSet,
    problem,
    trie: VisitedTrie,
    cap: int | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[NDSet, ULSReport]:
    """One ULS pass over the whole ND set, or over ``cap`` random members."""
    members = ndset.solutions()
    if not members:
        raise ValueError("unit local search needs a non-empty ND set")
    for s in members:
        trie.insert(s.decision)
    if cap is not None and len(members) > cap:
        if rng is None:
            raise ValueError("partial local search needs an rng")
        pick = np.sort(rng.choice(len(members), size=cap, replace=False))
        members = [members[i] for i in pick]

    pending: list[tuple[int, ...]] = []
    for s in members:
        for nb in neighbors(s.decision, problem.upper):
            if trie.insert(nb):
                pending.append(nb)
    if not pending:
        return ndset.copy(), ULSReport(0, 0, 0, len(ndset))

    evaluated = problem.evaluate_many(np.asarray(pending, dtype=np.int64))
    new = update_nd_set(ndset, evaluated)
    kept = {id(s) for s in new}
    accepted = sum(1 for s in evaluated if id(s) in kept)
    return new, ULSReport(accepted, len(evaluated) - accepted, len(evaluated), len(new))


def repeated_local_search(
    ndset: NDSet,
    problem,
    trie: VisitedTrie,
    cfg: LSConfig,
    rng: np.random.Generator | None = None,
) -> tuple[NDSet, list[ULSReport]]:
    """Repeat ULS until one accepts nothing or ``cfg.max_repeats`` is reached.

    Partial mode (``cfg.max_explored`` set) does a single ULS.
    """
    if not cfg.enabled:
        raise ValueError("local search is disabled in this configuration")
    repeats = 1 if cfg.max_explored is not None else cfg.max_repeats
    reports: list[ULSReport] = []
    current = ndset
    for _ in range(repeats):
        current, rep = unit_local_search(current, problem, trie, cfg.max_explored, rng)
        reports.append(rep)
        if rep.n_accepted == 0:
            break
    return current, reports
