"""Steady-state, demand-driven pipe network hydraulics.

Heads and flows are found with the global gradient (Todini-Pilati) Newton
scheme using the Hazen-Williams headloss law in SI units.  The solver is
vectorised over a batch of diameter assignments for the same topology, which
is how the optimisers evaluate a whole swarm (or a whole neighbourhood) in a
single call.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

HW_COEFF = 10.667
HW_FLOW_EXP = 1.852
HW_DIAM_EXP = 4.871

# below this |Q| (m3/s) the headloss law is linearised
ZERO_FLOW_THRESHOLD = 1e-6
HEAD_TOL = 1e-6
# Heads of absurd magnitude (tiny pipe carrying the whole demand) hit the
# double precision floor; after STAGNATION_ITER iterations a relative head
# change test is accepted instead.
HEAD_TOL_REL = 1e-6
STAGNATION_ITER = 20
BALANCE_TOL = 1e-6
MAX_ITER = 200


class HydraulicsError(RuntimeError):
    pass


class NonConvergence(HydraulicsError):
    pass


class DisconnectedNetwork(HydraulicsError):
    pass


class Junction(NamedTuple):
    id: str
    elevation: float
    demand: float
    min_head: float


class Reservoir(NamedTuple):
    id: str
    head: float


class Pipe(NamedTuple):
    id: str
    start: str
    end: str
    length: float
    roughness: float


class DiameterOption(NamedTuple):
    diameter_mm: float
    unit_cost: float


@dataclass(frozen=True, eq=False)
class Network:
    """Junctions, reservoirs, pipes and the candidate diameter table.

    ``demand`` is in m3/s, ``min_head`` is the minimum pressure head above the
    junction elevation (m), ``unit_cost`` is currency per metre of pipe.
    """

    junctions: tuple[Junction, ...]
    reservoirs: tuple[Reservoir, ...]
    pipes: tuple[Pipe, ...]
    diameter_table: tuple[DiameterOption, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "junctions", tuple(Junction(*j) for j in self.junctions))
        object.__setattr__(self, "reservoirs", tuple(Reservoir(*r) for r in self.reservoirs))
        object.__setattr__(self, "pipes", tuple(Pipe(*p) for p in self.pipes))
        object.__setattr__(
            self, "diameter_table", tuple(DiameterOption(*d) for d in self.diameter_table)
        )
        if not self.reservoirs:
            raise ValueError("network needs at least one reservoir")
        ids = [j.id for j in self.junctions] + [r.id for r in self.reservoirs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for p in self.pipes:
            if p.start not in known or p.end not in known:
                raise ValueError(f"pipe {p.id} references an unknown node")
            if p.length <= 0 or p.roughness <= 0:
                raise ValueError(f"pipe {p.id} needs positive length and roughness")
        dias = [d.diameter_mm for d in self.diameter_table]
        if any(b <= a for a, b in zip(dias, dias[1:])) or any(d <= 0 for d in dias):
            raise ValueError("diameter table must be strictly ascending and positive")
        self._check_connected()

    def _check_connected(self) -> None:
        adj: dict[str, list[str]] = {n: [] for n in self.node_ids}
        for p in self.pipes:
            adj[p.start].append(p.end)
            adj[p.end].append(p.start)
        seen = {r.id for r in self.reservoirs}
        queue = deque(seen)
        while queue:
            for nb in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    queue.append(nb)
        missing = [j.id for j in self.junctions if j.id not in seen]
        if missing:
            raise DisconnectedNetwork(f"junctions not connected to any reservoir: {missing}")

    @property
    def node_ids(self) -> list[str]:
        return [j.id for j in self.junctions] + [r.id for r in self.reservoirs]

    @property
    def n_pipes(self) -> int:
        return len(self.pipes)

    @property
    def n_dia(self) -> int:
        return len(self.diameter_table)

    @cached_property
    def arrays(self) -> "_NetworkArrays":
        return _NetworkArrays.build(self)

    def diameters_m(self, decision) -> np.ndarray:
        """Map 1-based diameter indices (any leading batch shape) to metres."""
        idx = np.asarray(decision, dtype=np.int64)
        if idx.shape[-1] != self.n_pipes:
            raise ValueError(f"decision needs {self.n_pipes} entries, got {idx.shape[-1]}")
        if idx.min() < 1 or idx.max() > self.n_dia:
            raise ValueError(f"diameter indices must lie in [1, {self.n_dia}]")
        return self.arrays.dia_m[idx - 1]

    def subset_diameters(self, indices: Sequence[int], name: str | None = None) -> "Network":
        """Copy of the network restricted to the given 1-based table rows."""
        table = tuple(self.diameter_table[i - 1] for i in sorted(indices))
        return Network(self.junctions, self.reservoirs, self.pipes, table,
                       name if name is not None else self.name)


@dataclass(frozen=True, eq=False)
class _NetworkArrays:
    inc_j: np.ndarray  # (n_pipes, n_junctions) +1 at start, -1 at end
    inc_f: np.ndarray  # (n_pipes, n_reservoirs)
    outer: np.ndarray  # (n_pipes, n_junctions**2) row p = vec(inc_j[p] inc_j[p]^T)
    h_fixed: np.ndarray
    demand: np.ndarray
    elevation: np.ndarray
    min_head: np.ndarray
    length: np.ndarray
    roughness: np.ndarray
    dia_m: np.ndarray
    unit_cost: np.ndarray

    @classmethod
    def build(cls, net: Network) -> "_NetworkArrays":
        jpos = {j.id: i for i, j in enumerate(net.junctions)}
        rpos = {r.id: i for i, r in enumerate(net.reservoirs)}
        inc_j = np.zeros((net.n_pipes, len(net.junctions)))
        inc_f = np.zeros((net.n_pipes, len(net.reservoirs)))
        for k, p in enumerate(net.pipes):
            for node, sign in ((p.start, 1.0), (p.end, -1.0)):
                if node in jpos:
                    inc_j[k, jpos[node]] += sign
                else:
                    inc_f[k, rpos[node]] += sign
        outer = np.einsum("pi,pj->pij", inc_j, inc_j).reshape(net.n_pipes, -1)
        return cls(
            inc_j=inc_j,
            outer=outer,
            inc_f=inc_f,
            h_fixed=np.array([r.head for r in net.reservoirs], dtype=float),
            demand=np.array([j.demand for j in net.junctions], dtype=float),
            elevation=np.array([j.elevation for j in net.junctions], dtype=float),
            min_head=np.array([j.min_head for j in net.junctions], dtype=float),
            length=np.array([p.length for p in net.pipes], dtype=float),
            roughness=np.array([p.roughness for p in net.pipes], dtype=float),
            dia_m=np.array([d.diameter_mm for d in net.diameter_table]) / 1000.0,
            unit_cost=np.array([d.unit_cost for d in net.diameter_table], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class HydraulicState:
    """Solved network. ``heads`` follows ``Network.node_ids`` order."""

    flows: np.ndarray
    heads: np.ndarray
    junction_heads: np.ndarray
    diameters: np.ndarray
    converged: bool
    iterations: int


class BatchState(NamedTuple):
    flows: np.ndarray  # (B, n_pipes)
    junction_heads: np.ndarray  # (B, n_junctions)
    converged: np.ndarray  # (B,) bool
    iterations: np.ndarray  # (B,) int


def headloss_hw(length, diameter, roughness, flow):
    """Hazen-Williams headloss (m) from start to end for signed flow (m3/s).

    ``diameter`` is in metres. Works elementwise on arrays.
    """
    q = np.asarray(flow, dtype=float)
    k = HW_COEFF * np.asarray(length) * np.power(roughness, -HW_FLOW_EXP) * np.power(
        diameter, -HW_DIAM_EXP
    )
    out = k * np.power(np.abs(q), HW_FLOW_EXP) * np.sign(q)
    return out if out.ndim else float(out)


def resistance(length, diameter, roughness) -> np.ndarray:
    return HW_COEFF * np.asarray(length) * np.power(roughness, -HW_FLOW_EXP) * np.power(
        diameter, -HW_DIAM_EXP
    )


def solve_batch(
    net: Network,
    diameters_m: np.ndarray,
    *,
    max_iter: int = MAX_ITER,
    head_tol: float = HEAD_TOL,
    balance_tol: float = BALANCE_TOL,
) -> BatchState:
    """Solve every row of ``diameters_m`` (shape (B, n_pipes), metres).

    Rows that do not converge within ``max_iter`` are flagged, not raised.
    """
    a = net.arrays
    dia = np.atleast_2d(np.asarray(diameters_m, dtype=float))
    n_batch = dia.shape[0]
    A12, A10 = a.inc_j, a.inc_f
    A21 = A12.T
    fixed_term = A10 @ a.h_fixed  # (n_pipes,)
    K = resistance(a.length, dia, a.roughness)  # (B, n_pipes)
    k_lin = K * ZERO_FLOW_THRESHOLD ** (HW_FLOW_EXP - 1.0)

    Q = 0.3048 * np.pi * dia**2 / 4.0
    H = np.zeros((n_batch, A12.shape[1]))
    converged = np.zeros(n_batch, dtype=bool)
    iterations = np.zeros(n_batch, dtype=np.int64)
    active = np.arange(n_batch)

    for it in range(1, max_iter + 1):
        q = Q[active]
        k = K[active]
        aq = np.abs(q)
        small = aq < ZERO_FLOW_THRESHOLD
        pw = np.power(np.where(small, 1.0, aq), HW_FLOW_EXP - 1.0)
        phi = np.where(small, k_lin[active] * q, k * pw * q)
        grad = np.where(small, k_lin[active], HW_FLOW_EXP * k * pw)
        ginv = 1.0 / grad
        # (A21 G^-1 A12) H = -(d + A21 Q + A21 G^-1 (A10 H0 - phi))
        nj = A12.shape[1]
        mat = (ginv @ a.outer).reshape(len(active), nj, nj)
        rhs = -(a.demand + q @ A12 + (ginv * (fixed_term - phi)) @ A12)
        try:
            h_new = np.linalg.solve(mat, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            h_new = np.full_like(rhs, np.nan)
        q_new = q + ginv * (h_new @ A21 + fixed_term - phi)
        dh = np.max(np.abs(h_new - H[active]), axis=1) if h_new.shape[1] else np.zeros(len(active))
        imbalance = np.abs(-(q_new @ A12) - a.demand)
        resid = imbalance.max(axis=1) if imbalance.shape[1] else np.zeros(len(active))
        Q[active] = q_new
        H[active] = h_new
        iterations[active] = it
        scale = np.max(np.abs(h_new), axis=1) if h_new.shape[1] else np.zeros(len(active))
        tol = head_tol if it <= STAGNATION_ITER else np.maximum(head_tol, HEAD_TOL_REL * scale)
        done = (dh < tol) & (resid < balance_tol)
        bad = ~np.isfinite(dh)
        converged[active[done]] = True
        active = active[~(done | bad)]
        if active.size == 0:
            break
    return BatchState(Q, H, converged, iterations)


def solve_steady_state(net: Network, decision: Sequence[int], **kwargs) -> HydraulicState:
    """Solve for one decision vector of 1-based diameter indices.

    Raises :class:`NonConvergence` when the Newton iteration fails.
    """
    dia = net.diameters_m(decision)
    res = solve_batch(net, dia[None, :], **kwargs)
    if not res.converged[0]:
        raise NonConvergence(
            f"no convergence after {int(res.iterations[0])} iterations"
        )
    return state_from_batch(net, res, dia[None, :], 0)


def state_from_batch(net: Network, res: BatchState, dia: np.ndarray, i: int) -> HydraulicState:
    hj = res.junction_heads[i].copy()
    heads = np.concatenate([hj, net.arrays.h_fixed])
    return HydraulicState(
        flows=res.flows[i].copy(),
        heads=heads,
        diameters=np.asarray(dia[i], dtype=float).copy(),
        converged=bool(res.converged[i]),
        iterations=int(res.iterations[i]),
        junction_heads=hj,
    )


def mass_balance_residual(net: Network, state: HydraulicState) -> float:
    """Largest junction imbalance |inflow - outflow - demand| in m3/s."""
    a = net.arrays
    if a.inc_j.shape[1] == 0:
        return 0.0
    imbalance = -(a.inc_j.T @ np.asarray(state.flows, dtype=float)) - a.demand
    return float(np.max(np.abs(imbalance)))


def reservoir_outflows(net: Network, flows: np.ndarray) -> np.ndarray:
    """Net flow leaving each reservoir (m3/s); rows of ``flows`` are pipes."""
    return np.asarray(flows) @ net.arrays.inc_f
