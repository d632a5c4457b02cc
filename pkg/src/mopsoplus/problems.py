"""Objective evaluation: WDS design, the Kita test problem, FE counting and
exhaustive enumeration.

A problem exposes ``n_vars``, ``upper`` (per-variable number of levels, the
decision indices run from 1 to ``upper[k]``) and ``evaluate_many`` which maps
a batch of decision vectors to :class:`~mopsoplus.core.Solution` objects.
"""
from __future__ import annotations

import itertools
import math
import sys
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Feasibility, NDSet, ObjectivePair, Solution
from .hydraulics import (
    HydraulicState,
    Network,
    NonConvergence,
    reservoir_outflows,
    solve_batch,
    state_from_batch,
)
from .netio import bundled_path, read_network

DEFICIT_SENTINEL = sys.float_info.max


class SearchSpaceTooLarge(ValueError):
    pass


class Problem:
    """Base class; subclasses implement :meth:`evaluate_many`."""

    name = "problem"
    n_vars: int
    upper: np.ndarray

    def evaluate_many(self, decisions: np.ndarray) -> list[Solution]:
        raise NotImplementedError

    def evaluate(self, decision: Sequence[int]) -> tuple[ObjectivePair, Feasibility]:
        s = self.evaluate_many(np.asarray([decision], dtype=np.int64))[0]
        return s.objectives, s.feasibility

    def solution(self, decision: Sequence[int]) -> Solution:
        return self.evaluate_many(np.asarray([decision], dtype=np.int64))[0]

    @property
    def search_space_size(self) -> int:
        return math.prod(int(u) for u in self.upper)

    def check_decisions(self, decisions) -> np.ndarray:
        d = np.atleast_2d(np.asarray(decisions, dtype=np.int64))
        if d.shape[1] != self.n_vars:
            raise ValueError(f"decision needs {self.n_vars} entries, got {d.shape[1]}")
        if (d < 1).any() or (d > self.upper).any():
            raise ValueError("decision index out of range")
        return d


# -- network resilience ----------------------------------------------------

def nodal_uniformity(net: Network, diameters: np.ndarray) -> np.ndarray:
    """Mean over max diameter of the pipes meeting each junction.

    ``diameters`` may carry a leading batch axis.
    """
    adj = np.abs(net.arrays.inc_j) > 0  # (n_pipes, n_junctions)
    d = np.asarray(diameters, dtype=float)[..., :, None]
    total = np.sum(np.where(adj, d, 0.0), axis=-2)
    biggest = np.max(np.where(adj, d, 0.0), axis=-2)
    count = adj.sum(axis=0)
    return total / (count * biggest)


def resilience_index(
    net: Network,
    state: HydraulicState,
    uniformity: bool = True,
) -> float:
    """Surplus-power resilience of a solved network.

    ``sum_j C_j q_j (h_j - h_req_j) / (sum_r Q_r H_r - sum_j q_j h_req_j)``
    where ``h_req`` is elevation plus minimum pressure head and ``C_j`` the
    nodal diameter uniformity.  With ``uniformity=False`` every ``C_j`` is 1
    (Todini's index).
    """
    value = _resilience(
        net,
        np.asarray(state.junction_heads)[None, :],
        np.asarray(state.flows)[None, :],
        np.asarray(state.diameters)[None, :],
        uniformity,
    )[0]
    if np.isnan(value):
        raise ValueError("resilience undefined: reservoirs supply no surplus power")
    return float(value)


def _resilience(net, heads, flows, dia, uniformity):
    """Row-wise index; NaN where the denominator is not positive."""
    a = net.arrays
    h_req = a.elevation + a.min_head
    q = a.demand
    surplus = q * (heads - h_req)
    if uniformity:
        surplus = surplus * nodal_uniformity(net, dia)
    supplied = reservoir_outflows(net, flows) @ a.h_fixed
    denom = supplied - np.dot(q, h_req)
    ok = denom > 0
    return np.where(ok, surplus.sum(axis=1) / np.where(ok, denom, 1.0), np.nan)


# -- WDS design problem ----------------------------------------------------

class WDSProblem(Problem):
    """Maximise resilience and minimise cost (millions) of a pipe sizing."""

    def __init__(self, network: Network, uniformity: bool = True, cost_scale: float = 1e-6):
        self.network = network
        self.name = network.name or "wds"
        self.n_vars = network.n_pipes
        self.upper = np.full(self.n_vars, network.n_dia, dtype=np.int64)
        self.uniformity = uniformity
        self.cost_scale = cost_scale

    def cost(self, decisions) -> np.ndarray:
        d = self.check_decisions(decisions)
        a = self.network.arrays
        return (a.unit_cost[d - 1] * a.length).sum(axis=1) * self.cost_scale

    def solve(self, decision) -> HydraulicState:
        d = self.check_decisions(decision)
        dia = self.network.diameters_m(d)
        res = solve_batch(self.network, dia)
        if not res.converged[0]:
            raise NonConvergence(f"no convergence after {int(res.iterations[0])} iterations")
        return state_from_batch(self.network, res, dia, 0)

    def evaluate_many(self, decisions) -> list[Solution]:
        """Rows whose hydraulics fail to converge, or whose resilience is
        undefined, come back infeasible with the sentinel deficit and zero
        resilience."""
        d = self.check_decisions(decisions)
        net = self.network
        a = net.arrays
        dia = net.diameters_m(d)
        res = solve_batch(net, dia)
        cost = self.cost(d)
        ok = res.converged
        h_req = a.elevation + a.min_head
        deficit = np.maximum(h_req - res.junction_heads, 0.0).sum(axis=1)
        resil = np.zeros(len(d))
        if ok.any():
            resil[ok] = _resilience(net, res.junction_heads[ok], res.flows[ok], dia[ok],
                                    self.uniformity)
        out = []
        for k in range(len(d)):
            if ok[k] and np.isfinite(resil[k]) and np.isfinite(deficit[k]):
                feas = Feasibility.from_deficit(deficit[k])
                obj = ObjectivePair(float(resil[k]), float(cost[k]))
            else:
                feas = Feasibility(False, DEFICIT_SENTINEL)
                obj = ObjectivePair(0.0, float(cost[k]))
            out.append(Solution(tuple(int(x) for x in d[k]), obj, feas))
        return out


def evaluate_wds(p: WDSProblem, decision) -> tuple[ObjectivePair, Feasibility]:
    return p.evaluate(decision)


# -- Kita test problem -----------------------------------------------------

# rows (a1, a2, b) meaning a1*x1 + a2*x2 <= b
KITA_CONSTRAINTS = (
    (1.0 / 6.0, 1.0, 13.0 / 2.0),
    (0.5, 1.0, 15.0 / 2.0),
    (5.0, 1.0, 30.0),
)
KITA_BOUNDS = ((0.0, 7.0), (0.0, 7.0))


def kita_objectives(x1: float, x2: float) -> tuple[float, float]:
    """Both maximised."""
    return -x1 * x1 + x2, 0.5 * x1 + x2 + 1.0


def kita_violation(x1: float, x2: float, constraints=KITA_CONSTRAINTS) -> float:
    return sum(max(0.0, a1 * x1 + a2 * x2 - b) for a1, a2, b in constraints)


def evaluate_kita(x) -> tuple[ObjectivePair, Feasibility]:
    """Kita objectives mapped to (maximised, minimised) as ``(f1, -f2)``."""
    x1, x2 = float(x[0]), float(x[1])
    f1, f2 = kita_objectives(x1, x2)
    return ObjectivePair(f1, -f2), Feasibility.from_deficit(kita_violation(x1, x2))


class KitaProblem(Problem):
    """Kita's problem sampled on a regular grid.

    Index ``i`` of variable ``k`` maps to ``lo_k + (i - 1) * step_k``, so ±1
    index moves are the ±Δx neighbour moves of the continuous problem.  The
    default step is 1% of each variable's range.
    """

    name = "kita"

    def __init__(self, levels: int = 101, bounds=KITA_BOUNDS, constraints=KITA_CONSTRAINTS):
        self.bounds = tuple(tuple(map(float, b)) for b in bounds)
        self.constraints = tuple(constraints)
        self.n_vars = 2
        self.upper = np.full(2, levels, dtype=np.int64)
        self.step = np.array([(hi - lo) / (levels - 1) for lo, hi in self.bounds])

    def to_x(self, decision) -> np.ndarray:
        d = np.asarray(decision, dtype=float)
        lo = np.array([b[0] for b in self.bounds])
        return lo + (d - 1.0) * self.step

    def evaluate_many(self, decisions) -> list[Solution]:
        d = self.check_decisions(decisions)
        out = []
        for row, x in zip(d, self.to_x(d)):
            f1, f2 = kita_objectives(x[0], x[1])
            v = kita_violation(x[0], x[1], self.constraints)
            out.append(Solution(tuple(int(t) for t in row), ObjectivePair(float(f1), float(-f2)),
                                Feasibility.from_deficit(v)))
        return out


# -- counting wrapper ------------------------------------------------------

class EvalCounter(Problem):
    """Counts every decision vector passed to the wrapped problem."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.name = problem.name
        self.n_vars = problem.n_vars
        self.upper = problem.upper
        self.n_fe = 0
        self._lock = threading.Lock()

    def evaluate_many(self, decisions) -> list[Solution]:
        out = self.problem.evaluate_many(decisions)
        with self._lock:
            self.n_fe += len(out)
        return out

    def __getattr__(self, item):
        return getattr(self.problem, item)


# -- exhaustive enumeration ------------------------------------------------

def iter_decisions(upper: Sequence[int], chunk: int = 8192) -> Iterable[np.ndarray]:
    """All decision vectors in lexicographic order, in chunks."""
    ranges = [range(1, int(u) + 1) for u in upper]
    it = itertools.product(*ranges)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.asarray(block, dtype=np.int64)


def enumerate_bruteforce(problem: Problem, limit: int = 1_000_000) -> NDSet:
    """Evaluate every configuration and return the exact front."""
    size = problem.search_space_size
    if size > limit:
        raise SearchSpaceTooLarge(f"{size} configurations exceed the limit of {limit}")
    front = NDSet()
    for block in iter_decisions(problem.upper):
        front.update(problem.evaluate_many(block))
    return front


# -- benchmark registry ----------------------------------------------------

@dataclass(frozen=True)
class BenchmarkInfo:
    name: str
    n_pipes: int
    n_dia: int
    search_space: float
    n_fe_net: float
    n_pf: int
    category: str
    filename: str | None = None


BENCHMARKS = {
    "TLN": BenchmarkInfo("TLN", 8, 14, 1.48e9, 15e6, 128, "SP", "tln.net"),
    "NYT": BenchmarkInfo("NYT", 21, 16, 1.93e25, 90e6, 627, "MP"),
    "BLA": BenchmarkInfo("BLA", 23, 14, 2.30e26, 90e6, 901, "MP"),
    "HAN": BenchmarkInfo("HAN", 34, 6, 2.87e26, 90e6, 575, "MP", "han.inp"),
    "GOY": BenchmarkInfo("GOY", 30, 8, 1.24e27, 90e6, 480, "MP"),
    "PES": BenchmarkInfo("PES", 99, 13, 1.91e110, 150e6, 782, "IP"),
}


def load_network(name: str) -> Network:
    """Load a bundled benchmark network by its short name (``TLN``, ``HAN``)."""
    info = BENCHMARKS[name.upper()]
    if info.filename is None:
        raise FileNotFoundError(
            f"{info.name} data is not bundled; pass the network file path instead"
        )
    net = read_network(bundled_path(info.filename))
    return Network(net.junctions, net.reservoirs, net.pipes, net.diameter_table, info.name)


def smallest_feasible_diameters(net: Network, count: int = 4) -> list[int]:
    """1-based indices of the ``count`` smallest diameters that, used for
    every pipe, satisfy all minimum pressures."""
    problem = WDSProblem(net)
    levels = np.arange(1, net.n_dia + 1)
    sols = problem.evaluate_many(np.repeat(levels[:, None], net.n_pipes, axis=1))
    ok = [int(k) for k, s in zip(levels, sols) if s.feasible]
    if len(ok) < count:
        raise ValueError(f"only {len(ok)} uniformly feasible diameters")
    return ok[:count]


def reduced_tln(count: int = 4) -> WDSProblem:
    """TLN with every pipe restricted to the ``count`` smallest feasible sizes."""
    net = load_network("TLN")
    keep = smallest_feasible_diameters(net, count)
    return WDSProblem(net.subset_diameters(keep, name=f"TLN{count}"))
