"""Reading and writing network description files.

Two formats are understood:

* the native format, with sections ``[JUNCTIONS]`` (id elevation demand
  min_head), ``[RESERVOIRS]`` (id head), ``[PIPES]`` (id node1 node2 length
  roughness) and ``[DIAMETERS]`` (diameter_mm cost_per_m).  Demands are in
  m3/s, lengths and heads in m.
* the subset of EPANET INP covering ``[JUNCTIONS]``, ``[RESERVOIRS]``,
  ``[PIPES]`` and ``[DEMANDS]``, with the flow units taken from
  ``[OPTIONS] Units``.  INP files carry neither a diameter table nor minimum
  pressures, so both may be supplied by the caller or through the non-standard
  ``[DIAMETERS]`` section and the ``Required Pressure`` option.

``;`` starts a comment in both formats.
"""
from __future__ import annotations

import logging
import os
import warnings
from importlib import resources
from pathlib import Path
from typing import Sequence

from .hydraulics import DiameterOption, Junction, Network, Pipe, Reservoir

logger = logging.getLogger(__name__)

NATIVE_SECTIONS = {"JUNCTIONS", "RESERVOIRS", "PIPES", "DIAMETERS"}

# m3/s per unit of flow; US units also imply feet for lengths and heads
FLOW_UNITS = {
    "CFS": (0.028316846592, True),
    "GPM": (6.30901964e-05, True),
    "MGD": (0.0438126364, True),
    "IMGD": (0.0526167531, True),
    "AFD": (0.0142764101, True),
    "LPS": (1e-3, False),
    "LPM": (1e-3 / 60.0, False),
    "MLD": (1e3 / 86400.0, False),
    "CMH": (1.0 / 3600.0, False),
    "CMD": (1.0 / 86400.0, False),
    "CMS": (1.0, False),
}
FT = 0.3048
_INP_IGNORED_QUIETLY = {"TITLE", "OPTIONS", "COORDINATES", "VERTICES", "LABELS",
                        "BACKDROP", "TAGS", "END", "REPORT", "TIMES"}
_INP_UNSUPPORTED = {"TANKS", "PUMPS", "VALVES"}


class NetworkFormatError(ValueError):
    pass


def _sections(text: str) -> dict[str, list[list[str]]]:
    out: dict[str, list[list[str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise NetworkFormatError(f"line {lineno}: malformed section header {raw!r}")
            current = line[1:-1].strip().upper()
            out.setdefault(current, [])
            continue
        if current is None:
            raise NetworkFormatError(f"line {lineno}: data before any section header")
        out[current].append(line.split())
    return out


def _num(tok: str, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise NetworkFormatError(f"bad {what}: {tok!r}") from None


def parse_native(text: str, name: str = "") -> Network:
    sec = _sections(text)
    unknown = set(sec) - NATIVE_SECTIONS
    if unknown:
        raise NetworkFormatError(f"unknown sections: {sorted(unknown)}")
    try:
        junctions = [
            Junction(r[0], _num(r[1], "elevation"), _num(r[2], "demand"), _num(r[3], "min head"))
            for r in sec.get("JUNCTIONS", [])
        ]
        reservoirs = [Reservoir(r[0], _num(r[1], "head")) for r in sec.get("RESERVOIRS", [])]
        pipes = [
            Pipe(r[0], r[1], r[2], _num(r[3], "length"), _num(r[4], "roughness"))
            for r in sec.get("PIPES", [])
        ]
        table = [
            DiameterOption(_num(r[0], "diameter"), _num(r[1], "cost"))
            for r in sec.get("DIAMETERS", [])
        ]
    except IndexError:
        raise NetworkFormatError("row with too few fields") from None
    return Network(junctions, reservoirs, pipes, table, name)


def parse_inp(
    text: str,
    name: str = "",
    *,
    min_pressure: float | None = None,
    diameter_table: Sequence[tuple[float, float]] | None = None,
) -> Network:
    sec = _sections(text)
    options = {}
    for row in sec.get("OPTIONS", []):
        # option keywords may be two words ("Required Pressure 30")
        if len(row) >= 3 and not _is_number(row[1]):
            options[" ".join(row[:2]).upper()] = row[2]
        elif len(row) >= 2:
            options[row[0].upper()] = row[1]
    units = options.get("UNITS", "GPM").upper()
    if units not in FLOW_UNITS:
        raise NetworkFormatError(f"unsupported flow units {units!r}")
    qf, us = FLOW_UNITS[units]
    lf = FT if us else 1.0
    if min_pressure is None:
        req = options.get("REQUIRED PRESSURE") or options.get("REQUIRED")
        min_pressure = float(req) * (lf if us else 1.0) if req is not None else 0.0

    for s in sorted(set(sec) & _INP_UNSUPPORTED):
        if sec[s]:
            raise NetworkFormatError(f"[{s}] entries are not supported")
    known = {"JUNCTIONS", "RESERVOIRS", "PIPES", "DEMANDS", "DIAMETERS"}
    for s in sorted(set(sec) - known - _INP_IGNORED_QUIETLY - _INP_UNSUPPORTED):
        if sec[s]:
            warnings.warn(f"ignoring INP section [{s}]", stacklevel=2)

    try:
        rows = sec.get("JUNCTIONS", [])
        demand = {r[0]: (_num(r[2], "demand") if len(r) > 2 else 0.0) for r in rows}
        if sec.get("DEMANDS"):
            # [DEMANDS] replaces the base demands of the junctions it lists
            listed: dict[str, float] = {}
            for r in sec["DEMANDS"]:
                listed[r[0]] = listed.get(r[0], 0.0) + _num(r[1], "demand")
            demand.update(listed)
        junctions = [
            Junction(r[0], _num(r[1], "elevation") * lf, demand[r[0]] * qf, min_pressure)
            for r in rows
        ]
        reservoirs = [Reservoir(r[0], _num(r[1], "head") * lf) for r in sec.get("RESERVOIRS", [])]
        pipes = [
            Pipe(r[0], r[1], r[2], _num(r[3], "length") * lf, _num(r[5], "roughness"))
            for r in sec.get("PIPES", [])
        ]
        if diameter_table is None:
            diameter_table = [
                (_num(r[0], "diameter"), _num(r[1], "cost")) for r in sec.get("DIAMETERS", [])
            ]
    except (IndexError, KeyError) as exc:
        raise NetworkFormatError(f"incomplete INP record: {exc}") from None
    return Network(junctions, reservoirs, pipes, diameter_table, name)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_network(path: str | os.PathLike, **inp_kwargs) -> Network:
    """Read a network file; ``.inp`` files go through the EPANET reader."""
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    if path.suffix.lower() == ".inp":
        return parse_inp(text, path.stem, **inp_kwargs)
    return parse_native(text, path.stem)


def format_native(net: Network) -> str:
    g = ".17g"
    lines = ["[JUNCTIONS]", "; id elevation demand(m3/s) min_head"]
    lines += [f"{j.id} {j.elevation:{g}} {j.demand:{g}} {j.min_head:{g}}" for j in net.junctions]
    lines += ["", "[RESERVOIRS]", "; id head"]
    lines += [f"{r.id} {r.head:{g}}" for r in net.reservoirs]
    lines += ["", "[PIPES]", "; id node1 node2 length roughness"]
    lines += [f"{p.id} {p.start} {p.end} {p.length:{g}} {p.roughness:{g}}" for p in net.pipes]
    lines += ["", "[DIAMETERS]", "; diameter_mm cost_per_m"]
    lines += [f"{d.diameter_mm:{g}} {d.unit_cost:{g}}" for d in net.diameter_table]
    return "\n".join(lines) + "\n"


def write_network(net: Network, path: str | os.PathLike) -> None:
    Path(path).write_text(format_native(net), encoding="utf-8")


def bundled_path(filename: str) -> Path:
    return Path(str(resources.files("mopsoplus") / "data" / filename))
