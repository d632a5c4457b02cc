"""External repository of ND solutions on a fixed-cell hypergrid.

The grid has no boundaries: any objective pair maps to some integer cell,
so the grid never needs to be rebuilt as the front moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import InsertOutcome, InsertResult, NDSet, ObjectivePair, Solution


@dataclass(frozen=True)
class HypergridConfig:
    cell_size_resilience: float
    cell_size_cost: float

    def __post_init__(self):
        if not (self.cell_size_resilience > 0 and self.cell_size_cost > 0):
            raise ValueError("hypergrid cell sizes must be strictly positive")


def cell_of(o: ObjectivePair, cfg: HypergridConfig) -> tuple[int, int]:
    return (
        math.floor(o[0] / cfg.cell_size_resilience),
        math.floor(o[1] / cfg.cell_size_cost),
    )


def default_hypergrid(
    solutions: Sequence[Solution],
    resilience_cell: float = 0.005,
    cost_fraction: float = 0.005,
) -> HypergridConfig:
    """Resilience cell fixed, cost cell a fraction of the observed cost range.

    Feasible solutions are preferred for the range; if there are none, all
    solutions are used.
    """
    pool = [s for s in solutions if s.feasible] or list(solutions)
    costs = [s.objectives.cost for s in pool]
    span = (max(costs) - min(costs)) if costs else 0.0
    if span <= 0:
        span = max((abs(c) for c in costs), default=0.0) or 1.0
    return HypergridConfig(resilience_cell, cost_fraction * span)


class EmptyArchiveError(RuntimeError):
    pass


class Archive:
    """ND set plus a map of occupied cells to the members inside them."""

    def __init__(self, config: HypergridConfig, solutions: Iterable[Solution] = ()):
        self.config = config
        self.ndset = NDSet()
        self.grid: dict[tuple[int, int], list[Solution]] = {}
        self._weights_cache = None
        for s in solutions:
            self.insert(s)

    def __len__(self) -> int:
        return len(self.ndset)

    def __iter__(self):
        return iter(self.ndset)

    def insert(self, s: Solution) -> InsertResult:
        result = self.ndset.insert(s)
        if result.outcome.accepted:
            for old in result.removed:
                self._drop(old)
            self.grid.setdefault(cell_of(s.objectives, self.config), []).append(s)
            self._weights_cache = None
        return result

    def _drop(self, s: Solution) -> None:
        key = cell_of(s.objectives, self.config)
        members = self.grid[key]
        for i, m in enumerate(members):
            if m is s:
                del members[i]
                break
        if not members:
            del self.grid[key]

    def reset(self, ndset: NDSet) -> None:
        """Replace the contents with ``ndset`` (assumed non-dominated)."""
        self.ndset = NDSet()
        self.grid = {}
        self._weights_cache = None
        for s in ndset:
            self.insert(s)

    def select_leader(self, rng: np.random.Generator) -> Solution:
        """Roulette wheel over cells weighted by 1/occupancy, then uniform in cell."""
        if not self.grid:
            raise EmptyArchiveError("archive is empty; seed it before selecting a leader")
        if self._weights_cache is None:
            cells = list(self.grid.values())
            w = np.array([1.0 / len(c) for c in cells])
            self._weights_cache = (cells, np.cumsum(w) / w.sum())
        cells, cdf = self._weights_cache
        k = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(cells) - 1)
        members = cells[k]
        return members[int(rng.integers(len(members)))]

    def cell_probabilities(self) -> dict[tuple[int, int], float]:
        w = {k: 1.0 / len(v) for k, v in self.grid.items()}
        total = sum(w.values())
        return {k: x / total for k, x in w.items()}


def select_leader(arch: Archive, rng: np.random.Generator) -> Solution:
    return arch.select_leader(rng)


def insert(arch: Archive, s: Solution) -> InsertResult:
    return arch.insert(s)


__all__ = [
    "Archive",
    "EmptyArchiveError",
    "HypergridConfig",
    "InsertOutcome",
    "cell_of",
    "default_hypergrid",
    "insert",
    "select_leader",
]
