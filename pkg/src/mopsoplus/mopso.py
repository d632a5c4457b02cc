"""Multi-objective particle swarm optimiser with archive leaders, mutation
schedules and periodic local search.

Positions and velocities are real vectors; a particle's decision is its
position rounded to the nearest integer index.  All randomness of a run comes
from one seed, split into a swarm stream (leader choice, partial LS) and one
stream per particle, so a run is reproducible bit for bit.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .archive import Archive, HypergridConfig, default_hypergrid
from .core import NDSet, Solution, constrained_dominates
from .localsearch import LS_OFF, LSConfig, VisitedTrie, ls_due, repeated_local_search
from .problems import EvalCounter

logger = logging.getLogger(__name__)

MUTATION_KINDS = ("none", "constant", "pulse", "periodic")


@dataclass(frozen=True)
class MutationSchedule:
    """Mutation probability as a function of iteration.

    ``constant``: ``probability`` from ``start`` on.  ``pulse``: only for
    ``width`` iterations starting at ``start``.  ``periodic``: for ``width``
    iterations out of every ``period``, from ``start`` on.
    """

    kind: str = "none"
    probability: float = 0.0
    width: int = 20
    period: int = 1000
    start: int = 0

    def __post_init__(self):
        if self.kind not in MUTATION_KINDS:
            raise ValueError(f"unknown mutation kind {self.kind!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("mutation probability must lie in [0, 1]")
        if self.kind == "periodic" and not (self.period >= 1 and self.width <= self.period):
            raise ValueError("periodic mutation needs 1 <= width <= period")


NO_MUTATION = MutationSchedule()


def mutation_probability(t: int, m: MutationSchedule) -> float:
    if m.kind == "none" or t < m.start:
        return 0.0
    if m.kind == "constant":
        return m.probability
    if m.kind == "pulse":
        return m.probability if t < m.start + m.width else 0.0
    return m.probability if (t - m.start) % m.period < m.width else 0.0


@dataclass(frozen=True)
class SwarmConfig:
    n_particles: int = 50
    n_iterations: int = 1000
    inertia: float = 0.4
    cognitive: float = 2.0
    social: float = 2.0
    leader_hold: int = 10
    shared_leader: bool = True
    mutation: MutationSchedule = NO_MUTATION
    ls: LSConfig = LS_OFF
    grid: HypergridConfig | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.inertia < 1.0:
            raise ValueError("inertia must lie in [0, 1)")
        if self.cognitive < 0 or self.social < 0:
            raise ValueError("learning factors must be nonnegative")
        if self.n_particles < 2:
            raise ValueError("need at least 2 particles")
        if self.leader_hold < 1:
            raise ValueError("leader_hold must be >= 1")
        if self.n_iterations < 0 or self.seed < 0:
            raise ValueError("n_iterations and seed must be nonnegative")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest: Solution


@dataclass
class RunStats:
    """Evaluation counts and traces of one run.

    ``pf_size_trace`` holds ``(iteration, front size)`` after every iteration;
    ``ls_iter_trace`` holds ``(iteration, ULS passes so far)`` at every LS event.
    """

    n_fe: int = 0
    n_fe_ls: int = 0
    pf_size_trace: list[tuple[int, int]] = field(default_factory=list)
    ls_iter_trace: list[tuple[int, int]] = field(default_factory=list)
    wall_time: float = 0.0
    seed: int = 0


def velocity_update(
    p: Particle,
    leader: Solution,
    cfg: SwarmConfig,
    rng: np.random.Generator | None = None,
    r: tuple[float, float] | None = None,
) -> np.ndarray:
    """Inertia + pull towards pbest + pull towards the leader.

    One pair ``(r1, r2)`` is drawn per call and applied to every component;
    pass ``r`` to fix it.
    """
    r1, r2 = r if r is not None else rng.random(2)
    x = p.position
    pb = np.asarray(p.pbest.decision, dtype=float)
    ld = np.asarray(leader.decision, dtype=float)
    if ld.shape != x.shape:
        raise ValueError("leader decision length does not match the particle")
    return cfg.inertia * p.velocity + cfg.cognitive * r1 * (pb - x) + cfg.social * r2 * (ld - x)


def position_update(p: Particle, upper) -> np.ndarray:
    """Move by the velocity and clip to [1, upper]; clipped velocity components
    are zeroed in place."""
    x = p.position + p.velocity
    hi = np.broadcast_to(np.asarray(upper, dtype=float), x.shape)
    clipped = (x < 1.0) | (x > hi)
    x = np.clip(x, 1.0, hi)
    p.velocity[clipped] = 0.0
    return x


def decode(position: np.ndarray, upper=None) -> np.ndarray:
    """Nearest integer, halves rounded away from zero."""
    x = np.asarray(position, dtype=float)
    d = np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5)).astype(np.int64)
    if upper is not None:
        d = np.clip(d, 1, upper)
    return d


def pbest_update(pbest: Solution, current: Solution, rng: np.random.Generator) -> Solution:
    if constrained_dominates(current, pbest):
        return current
    if constrained_dominates(pbest, current):
        return pbest
    return current if rng.random() < 0.5 else pbest


def mutate(decision: Sequence[int], upper, rng: np.random.Generator) -> np.ndarray:
    """Replace one random entry with a different random level."""
    d = np.array(decision, dtype=np.int64)
    k = int(rng.integers(len(d)))
    hi = int(np.broadcast_to(np.asarray(upper), d.shape)[k])
    if hi < 2:
        return d
    v = int(rng.integers(1, hi))  # 1..hi-1, shifted past the current value
    d[k] = v + 1 if v >= d[k] else v
    return d


def _streams(seed: int, n_particles: int):
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(n_particles + 1)
    return np.random.default_rng(children[0]), [np.random.default_rng(c) for c in children[1:]]


def run_single(problem, cfg: SwarmConfig, log_every: int = 0) -> tuple[NDSet, RunStats]:
    """One independent MOPSO run; returns the final ND set and statistics."""
    if cfg.n_particles < 2:
        raise ValueError("need at least 2 particles")
    t0 = time.perf_counter()
    counter = EvalCounter(problem)
    upper = np.asarray(problem.upper, dtype=np.int64)
    swarm_rng, prngs = _streams(cfg.seed, cfg.n_particles)
    stats = RunStats(seed=cfg.seed)
    trie = VisitedTrie()

    start = np.array([rng.integers(1, upper + 1) for rng in prngs], dtype=np.int64)
    sols = counter.evaluate_many(start)
    swarm = [
        Particle(start[i].astype(float), np.zeros(len(upper)), sols[i])
        for i in range(cfg.n_particles)
    ]
    archive = Archive(cfg.grid or default_hypergrid(sols))
    for s in sols:
        archive.insert(s)
    stats.pf_size_trace.append((0, len(archive)))

    leader = None
    ls_total = 0
    for t in range(1, cfg.n_iterations + 1):
        if cfg.shared_leader and (t - 1) % cfg.leader_hold == 0:
            leader = archive.select_leader(swarm_rng)
        pm = mutation_probability(t, cfg.mutation)
        decisions = np.empty((cfg.n_particles, len(upper)), dtype=np.int64)
        for i, p in enumerate(swarm):
            rng = prngs[i]
            lead = leader if cfg.shared_leader else archive.select_leader(swarm_rng)
            p.velocity = velocity_update(p, lead, cfg, rng)
            p.position = position_update(p, upper)
            d = decode(p.position, upper)
            if pm > 0.0 and rng.random() < pm:
                d = mutate(d, upper, rng)
                p.position = d.astype(float)
            decisions[i] = d
        sols = counter.evaluate_many(decisions)
        for i, p in enumerate(swarm):
            archive.insert(sols[i])
            p.pbest = pbest_update(p.pbest, sols[i], prngs[i])

        if ls_due(t, cfg.ls):
            before = counter.n_fe
            nd, reports = repeated_local_search(archive.ndset, counter, trie, cfg.ls, swarm_rng)
            archive.reset(nd)
            stats.n_fe_ls += counter.n_fe - before
            ls_total += len(reports)
            stats.ls_iter_trace.append((t, ls_total))
        stats.pf_size_trace.append((t, len(archive)))
        if log_every and t % log_every == 0:
            logger.info("seed %d iter %d: |PF|=%d n_fe=%d", cfg.seed, t, len(archive), counter.n_fe)

    stats.n_fe = counter.n_fe
    stats.wall_time = time.perf_counter() - t0
    return archive.ndset.copy(), stats


def _run_seed(args):
    problem, cfg = args
    return run_single(problem, cfg)


def run_many(problem, cfg: SwarmConfig, n_runs: int, jobs: int = 1) -> tuple[NDSet, list[RunStats]]:
    """Independent runs with seeds ``cfg.seed, cfg.seed + 1, ...`` merged into
    one front.  Results do not depend on ``jobs``."""
    if n_runs < 1:
        raise ValueError("need at least one run")
    cfgs = [replace(cfg, seed=cfg.seed + k) for k in range(n_runs)]
    if jobs > 1 and n_runs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_seed, [(problem, c) for c in cfgs]))
    else:
        results = [run_single(problem, c) for c in cfgs]
    merged = NDSet()
    for front, _ in results:
        merged.update(front)
    return merged, [s for _, s in results]


def total_fe(stats: Sequence[RunStats]) -> int:
    return sum(s.n_fe for s in stats)
