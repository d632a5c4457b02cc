"""Comparing two Pareto fronts through their combined front.

Each member of a front ends up either rejected (dominated by a member of the
other front), common (objective-equal to a member of the other front and not
dominated) or unique (kept, with no counterpart).  Counts per side:
``n_total = n_accepted + n_rejected`` and ``n_accepted = n_unique + n_common``.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import FEASIBLE, NDSet, ObjectivePair, Solution, constrained_dominates

REL_TOL = 1e-9


class InputNotND(ValueError):
    """A front contains a member dominated by (or duplicating) another member."""

    def __init__(self, message: str, rows: Sequence[tuple[int, int]] = ()):
        super().__init__(message)
        self.rows = list(rows)


class PFFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SideCounts:
    n_total: int
    n_accepted: int
    n_unique: int
    n_rejected: int


@dataclass(frozen=True)
class PFComparison:
    combined: NDSet
    a: SideCounts
    b: SideCounts
    n_common: int

    def swapped(self) -> "PFComparison":
        return PFComparison(self.combined, self.b, self.a, self.n_common)

    def table_row(self) -> tuple[int, ...]:
        """Counts in the order of :data:`TABLE_COLUMNS`."""
        a, b = self.a, self.b
        return (a.n_total, a.n_accepted, a.n_unique, a.n_rejected,
                b.n_total, b.n_accepted, b.n_unique, b.n_rejected, self.n_common)


TABLE_COLUMNS = ("N_A_t", "N_A_a", "N_A_u", "N_A_r", "N_B_t", "N_B_a", "N_B_u", "N_B_r", "N_c")


def _members(front) -> list[Solution]:
    if isinstance(front, NDSet):
        return front.solutions()
    return list(front)


def check_nd(front, label: str = "front") -> list[Solution]:
    """Return the members of ``front``; raise InputNotND listing offending
    index pairs ``(dominating, dominated)`` if it is not mutually ND."""
    sols = _members(front)
    bad = []
    for i, a in enumerate(sols):
        for j, b in enumerate(sols):
            if i == j:
                continue
            if constrained_dominates(a, b) or (i < j and a.objectives == b.objectives
                                               and a.feasibility == b.feasibility):
                bad.append((i, j))
    if bad:
        raise InputNotND(f"{label} is not non-dominated: {len(bad)} offending pair(s)", bad)
    return sols


def _close_matrix(a: list[Solution], b: list[Solution], rel_tol: float, decisions: bool) -> np.ndarray:
    if not a or not b:
        return np.zeros((len(a), len(b)), dtype=bool)
    oa = np.array([s.objectives for s in a], dtype=float)
    ob = np.array([s.objectives for s in b], dtype=float)
    close = np.all(np.isclose(oa[:, None, :], ob[None, :, :], rtol=rel_tol, atol=0.0), axis=2)
    fa = np.array([s.feasible for s in a])
    fb = np.array([s.feasible for s in b])
    close &= fa[:, None] == fb[None, :]
    if decisions:
        da = [s.decision for s in a]
        db = [s.decision for s in b]
        for i, j in zip(*np.nonzero(close)):
            if da[i] != db[j]:
                close[i, j] = False
    return close


def _match(close: np.ndarray) -> dict[int, int]:
    """Greedy one-to-one pairing of A indices to B indices."""
    pairs: dict[int, int] = {}
    used: set[int] = set()
    for i in range(close.shape[0]):
        for j in np.nonzero(close[i])[0]:
            j = int(j)
            if j not in used:
                pairs[i] = j
                used.add(j)
                break
    return pairs


def compare(pf_a, pf_b, *, rel_tol: float = REL_TOL, match_decisions: bool = False) -> PFComparison:
    """Count total, accepted, unique, common and rejected members of each front.

    Members are matched as common when their objectives agree to ``rel_tol``
    (and, with ``match_decisions``, their decision vectors are equal).  The
    combined front keeps the A representative of each common pair.
    """
    a = check_nd(pf_a, "front A")
    b = check_nd(pf_b, "front B")
    pairs = _match(_close_matrix(a, b, rel_tol, match_decisions))
    partner_of_b = {j: i for i, j in pairs.items()}

    combined = NDSet()
    for s in a:
        combined.insert(s)
    for j, s in enumerate(b):
        if j not in partner_of_b:
            combined.insert(s)
    kept = {id(s) for s in combined}

    in_a = [id(s) in kept for s in a]
    in_b = [
        in_a[partner_of_b[j]] if j in partner_of_b else id(s) in kept
        for j, s in enumerate(b)
    ]
    n_common = sum(1 for i in pairs if in_a[i])
    acc_a, acc_b = sum(in_a), sum(in_b)
    return PFComparison(
        combined,
        SideCounts(len(a), acc_a, acc_a - n_common, len(a) - acc_a),
        SideCounts(len(b), acc_b, acc_b - n_common, len(b) - acc_b),
        n_common,
    )


def combine(pf_a, pf_b, *, rel_tol: float = REL_TOL, check: bool = True) -> NDSet:
    """ND filter of the union, with objective-equal pairs kept once.

    With ``check=False`` the inputs need not be non-dominated themselves.
    """
    if check:
        return compare(pf_a, pf_b, rel_tol=rel_tol).combined
    return compare(NDSet(_members(pf_a)), NDSet(_members(pf_b)), rel_tol=rel_tol).combined


# -- PF CSV ---------------------------------------------------------------

def _g(x: float) -> str:
    return format(float(x), ".17g")


def format_pf_csv(front, n_vars: int | None = None) -> str:
    """CSV text ``resilience,cost,d_1..d_n`` sorted by ascending cost."""
    sols = sorted(_members(front), key=lambda s: (s.objectives.cost, -s.objectives.resilience, s.decision))
    if n_vars is None:
        n_vars = len(sols[0].decision) if sols else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["resilience", "cost"] + [f"d_{k}" for k in range(1, n_vars + 1)])
    for s in sols:
        if len(s.decision) != n_vars:
            raise ValueError("decision lengths differ within the front")
        w.writerow([_g(s.objectives.resilience), _g(s.objectives.cost)] + [str(v) for v in s.decision])
    return buf.getvalue()


def write_pf_csv(front, path: str | os.PathLike, n_vars: int | None = None) -> None:
    Path(path).write_text(format_pf_csv(front, n_vars), encoding="utf-8")


def parse_pf_csv(text: str) -> list[Solution]:
    """Rows of a PF CSV as feasible solutions, in file order."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise PFFormatError("empty PF file")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["resilience", "cost"]:
        raise PFFormatError("header must start with resilience,cost")
    n_vars = len(header) - 2
    if header[2:] != [f"d_{k}" for k in range(1, n_vars + 1)]:
        raise PFFormatError("decision columns must be named d_1..d_n")
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != n_vars + 2:
            raise PFFormatError(f"line {lineno}: expected {n_vars + 2} fields, got {len(row)}")
        try:
            obj = ObjectivePair(float(row[0]), float(row[1]))
            dec = tuple(int(v) for v in row[2:])
            out.append(Solution(dec, obj, FEASIBLE))
        except ValueError as exc:
            raise PFFormatError(f"line {lineno}: {exc}") from None
    return out


def read_pf_csv(path: str | os.PathLike) -> list[Solution]:
    return parse_pf_csv(Path(path).read_text(encoding="utf-8"))


def front_from_points(points: Iterable[tuple[float, float]]) -> list[Solution]:
    """Feasible solutions with empty decisions, for objective-only fronts."""
    return [Solution((), ObjectivePair(float(r), float(c)), FEASIBLE) for r, c in points]
