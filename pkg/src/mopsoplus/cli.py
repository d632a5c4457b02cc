"""Command line entry point: ``mopsoplus run|compare|enumerate|evaluate``.

Exit codes:

==  ==================================================================
0   success
2   bad configuration, malformed PF CSV or wrong decision length
3   problem (network) file missing or unreadable
4   evaluator or hydraulic failure
5   a compared front is not internally non-dominated
6   search space too large to enumerate
==  ==================================================================

Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .archive import HypergridConfig
from .hydraulics import HydraulicsError, NonConvergence
from .localsearch import LSConfig
from .mopso import MutationSchedule, SwarmConfig, run_many
from .netio import NetworkFormatError, read_network
from .pfcompare import (
    TABLE_COLUMNS,
    InputNotND,
    PFFormatError,
    compare,
    read_pf_csv,
    write_pf_csv,
)
from .problems import (
    BENCHMARKS,
    KitaProblem,
    SearchSpaceTooLarge,
    WDSProblem,
    enumerate_bruteforce,
    load_network,
    reduced_tln,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROBLEM_FILE = 3
EXIT_EVALUATOR = 4
EXIT_NOT_ND = 5
EXIT_TOO_LARGE = 6


class CLIError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    network: str = "TLN"
    problem_type: str = "wds"
    uniformity: bool = True
    kita_levels: int = 101
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    n_runs: int = 1
    pf_path: str = "pf.csv"
    stats_path: str | None = None


# accepted keys per config section, with their types
_SWARM_KEYS = {
    "n_particles": int, "n_iterations": int, "inertia": float, "cognitive": float,
    "social": float, "leader_hold": int, "shared_leader": bool, "seed": int,
}
_MUTATION_KEYS = {"kind": str, "probability": float, "width": int, "period": int, "start": int}
_LS_KEYS = {
    "enabled": bool, "start": int, "switch": int, "period_early": int,
    "period_late": int, "max_repeats": int, "max_explored": int,
}
_SECTIONS = {
    "problem": {"network", "type", "uniformity", "kita_levels"},
    "mopso": set(_SWARM_KEYS) | {"n_runs"},
    "mutation": set(_MUTATION_KEYS),
    "localsearch": set(_LS_KEYS),
    "archive": {"cell_resilience", "cell_cost"},
    "output": {"pf", "stats"},
}


def _typed(sec: configparser.SectionProxy, key: str, typ):
    if typ is bool:
        return sec.getboolean(key)
    if typ is int:
        return sec.getint(key)
    if typ is float:
        return sec.getfloat(key)
    return sec.get(key)


def parse_config(text: str, base_dir: Path | None = None) -> RunConfig:
    """Parse an INI run configuration; raises CLIError(2) on any problem."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
        for name in cp.sections():
            if name not in _SECTIONS:
                raise ValueError(f"unknown section [{name}]")
            extra = set(cp[name]) - _SECTIONS[name]
            if extra:
                raise ValueError(f"unknown key(s) in [{name}]: {', '.join(sorted(extra))}")

        cfg = RunConfig()
        if cp.has_section("problem"):
            p = cp["problem"]
            cfg.network = p.get("network", cfg.network)
            cfg.problem_type = p.get("type", cfg.problem_type).lower()
            cfg.uniformity = p.getboolean("uniformity", cfg.uniformity)
            cfg.kita_levels = p.getint("kita_levels", cfg.kita_levels)
            if cfg.problem_type not in ("wds", "kita"):
                raise ValueError(f"unknown problem type {cfg.problem_type!r}")
            if base_dir is not None and cfg.network.upper() not in _BUNDLED:
                net_path = Path(cfg.network)
                if not net_path.is_absolute():
                    cfg.network = str(base_dir / net_path)

        swarm_kw = {}
        if cp.has_section("mopso"):
            m = cp["mopso"]
            swarm_kw = {k: _typed(m, k, t) for k, t in _SWARM_KEYS.items() if k in m}
            cfg.n_runs = m.getint("n_runs", cfg.n_runs)
            if cfg.n_runs < 1:
                raise ValueError("n_runs must be >= 1")
        if cp.has_section("mutation"):
            m = cp["mutation"]
            swarm_kw["mutation"] = MutationSchedule(
                **{k: _typed(m, k, t) for k, t in _MUTATION_KEYS.items() if k in m}
            )
        if cp.has_section("localsearch"):
            m = cp["localsearch"]
            kw = {k: _typed(m, k, t) for k, t in _LS_KEYS.items() if k in m}
            swarm_kw["ls"] = LSConfig(**kw)
        if cp.has_section("archive"):
            m = cp["archive"]
            if set(m) != {"cell_resilience", "cell_cost"}:
                raise ValueError("[archive] needs both cell_resilience and cell_cost")
            swarm_kw["grid"] = HypergridConfig(m.getfloat("cell_resilience"), m.getfloat("cell_cost"))
        cfg.swarm = SwarmConfig(**swarm_kw)

        if cp.has_section("output"):
            o = cp["output"]
            cfg.pf_path = o.get("pf", cfg.pf_path)
            cfg.stats_path = o.get("stats", cfg.stats_path)
    except (configparser.Error, ValueError, TypeError) as exc:
        raise CLIError(EXIT_CONFIG, f"configuration error: {exc}") from None
    return cfg


def read_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(EXIT_CONFIG, f"cannot read configuration: {exc}") from None
    return parse_config(text, path.parent)


_BUNDLED = {"TLN4", "KITA"} | {k for k, v in BENCHMARKS.items() if v.filename}


def load_problem(network: str, problem_type: str = "wds", uniformity: bool = True,
                 kita_levels: int = 101):
    """Build a problem from a bundled name (``TLN``, ``HAN``, ``TLN4``) or a
    network file path; raises CLIError(3) when the network cannot be read."""
    if problem_type == "kita" or network.upper() == "KITA":
        return KitaProblem(kita_levels)
    try:
        key = network.upper()
        if key == "TLN4":
            p = reduced_tln(4)
            return WDSProblem(p.network, uniformity=uniformity)
        if key in BENCHMARKS and not Path(network).exists():
            net = load_network(key)
        else:
            net = read_network(network)
    except (OSError, NetworkFormatError, HydraulicsError) as exc:
        raise CLIError(EXIT_PROBLEM_FILE, f"cannot load network {network!r}: {exc}") from None
    except ValueError as exc:
        raise CLIError(EXIT_PROBLEM_FILE, f"invalid network {network!r}: {exc}") from None
    return WDSProblem(net, uniformity=uniformity)


# -- commands -------------------------------------------------------------

def cmd_run(cfg: RunConfig, jobs: int = 1) -> dict:
    """Run ``cfg.n_runs`` seeds, write the merged front CSV and a JSON
    summary; returns the summary."""
    problem = load_problem(cfg.network, cfg.problem_type, cfg.uniformity, cfg.kita_levels)
    try:
        front, stats = run_many(problem, cfg.swarm, cfg.n_runs, jobs=jobs)
    except (HydraulicsError, FloatingPointError, ValueError) as exc:
        raise CLIError(EXIT_EVALUATOR, f"evaluation failed: {exc}") from None
    write_pf_csv(front, cfg.pf_path, problem.n_vars)
    summary = {
        "network": cfg.network,
        "feasible_front": front.has_feasible,
        "merged_front_size": len(front),
        "total_n_fe": sum(s.n_fe for s in stats),
        "runs": [
            {"seed": s.seed, "n_fe": s.n_fe, "n_fe_ls": s.n_fe_ls,
             "front_size": s.pf_size_trace[-1][1], "ls_events": len(s.ls_iter_trace),
             "wall_time": s.wall_time}
            for s in stats
        ],
    }
    stats_path = cfg.stats_path or str(Path(cfg.pf_path).with_suffix(".stats.json"))
    Path(stats_path).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return summary


def _read_front(path: str):
    try:
        return read_pf_csv(path)
    except OSError as exc:
        raise CLIError(EXIT_CONFIG, f"cannot read {path}: {exc}") from None
    except PFFormatError as exc:
        raise CLIError(EXIT_CONFIG, f"malformed PF file {path}: {exc}") from None


def cmd_compare(path_a: str, path_b: str, combined_path: str | None = None,
                match_decisions: bool = False):
    a, b = _read_front(path_a), _read_front(path_b)
    try:
        result = compare(a, b, match_decisions=match_decisions)
    except InputNotND as exc:
        which = path_a if "front A" in str(exc) else path_b
        rows = ", ".join(f"row {i + 2} dominates/duplicates row {j + 2}" for i, j in exc.rows[:10])
        raise CLIError(EXIT_NOT_ND, f"{which} is not non-dominated: {rows}") from None
    if combined_path:
        n_vars = len(a[0].decision) if a else (len(b[0].decision) if b else 0)
        write_pf_csv(result.combined, combined_path, n_vars)
    return result


def cmd_enumerate(problem, out_path: str, limit: int = 1_000_000):
    try:
        front = enumerate_bruteforce(problem, limit=limit)
    except SearchSpaceTooLarge as exc:
        raise CLIError(EXIT_TOO_LARGE, str(exc)) from None
    except HydraulicsError as exc:
        raise CLIError(EXIT_EVALUATOR, f"evaluation failed: {exc}") from None
    write_pf_csv(front, out_path, problem.n_vars)
    return front


def decision_from_diameters(problem: WDSProblem, diameters_mm: Sequence[float], tol: float = 0.05):
    """Map diameters in mm to 1-based table indices."""
    table = np.array([d.diameter_mm for d in problem.network.diameter_table])
    out = []
    for d in diameters_mm:
        k = int(np.argmin(np.abs(table - d)))
        if abs(table[k] - d) > tol:
            raise CLIError(EXIT_CONFIG, f"diameter {d} mm is not in the table")
        out.append(k + 1)
    return out


def cmd_evaluate(problem, decision: Sequence[int]) -> str:
    if len(decision) != problem.n_vars:
        raise CLIError(EXIT_CONFIG, f"decision has {len(decision)} entries, expected {problem.n_vars}")
    upper = np.broadcast_to(np.asarray(problem.upper), (problem.n_vars,))
    if any(not 1 <= v <= u for v, u in zip(decision, upper)):
        raise CLIError(EXIT_CONFIG, "decision entry out of range")
    if isinstance(problem, WDSProblem):
        try:
            state = problem.solve(decision)
        except (NonConvergence, HydraulicsError) as exc:
            raise CLIError(EXIT_EVALUATOR, f"hydraulic failure: {exc}") from None
    sol = problem.solution(decision)
    parts = [
        f"resilience={sol.objectives.resilience:.17g}",
        f"cost={sol.objectives.cost:.17g}",
        f"feasible={str(sol.feasible).lower()}",
        f"deficit={sol.deficit:.17g}",
    ]
    if isinstance(problem, WDSProblem):
        heads = " ".join(
            f"{j.id}:{h:.6f}" for j, h in zip(problem.network.junctions, state.junction_heads)
        )
        parts.append(f"heads={heads}")
    return " ".join(parts)


# -- argument parsing -----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mopsoplus", description="Pipe network design by MOPSO with local search.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="optimise and write the merged front")
    r.add_argument("config", help="INI configuration file")
    r.add_argument("--seed", type=int, help="override the configured seed")
    r.add_argument("--runs", type=int, help="override the number of independent runs")
    r.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    r.add_argument("-o", "--output", help="PF CSV path (overrides [output] pf)")
    r.add_argument("--stats", help="summary JSON path (overrides [output] stats)")

    c = sub.add_parser("compare", help="count unique/common/rejected members of two fronts")
    c.add_argument("front_a")
    c.add_argument("front_b")
    c.add_argument("--combined", help="write the combined front here")
    c.add_argument("--match-decisions", action="store_true",
                   help="common members must also share decision vectors")

    e = sub.add_parser("enumerate", help="exact front by exhaustive evaluation")
    e.add_argument("network", help="network file or bundled name (TLN, TLN4, HAN)")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--limit", type=int, default=1_000_000)

    v = sub.add_parser("evaluate", help="evaluate one design")
    v.add_argument("network", help="network file or bundled name")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--decision", help="comma-separated 1-based diameter indices")
    g.add_argument("--diameters-mm", help="comma-separated diameters in mm")
    v.add_argument("--no-uniformity", action="store_true",
                   help="resilience without the nodal uniformity factor")
    return ap


def _csv_ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise CLIError(EXIT_CONFIG, f"bad decision list {text!r}") from None


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise CLIError(EXIT_CONFIG, f"bad diameter list {text!r}") from None


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "run":
            cfg = read_config(args.config)
            if args.seed is not None:
                if args.seed < 0:
                    raise CLIError(EXIT_CONFIG, "seed must be nonnegative")
                cfg.swarm = replace(cfg.swarm, seed=args.seed)
            if args.runs is not None:
                if args.runs < 1:
                    raise CLIError(EXIT_CONFIG, "runs must be >= 1")
                cfg.n_runs = args.runs
            if args.output:
                cfg.pf_path = args.output
            if args.stats:
                cfg.stats_path = args.stats
            summary = cmd_run(cfg, jobs=max(1, args.jobs))
            print(f"front_size={summary['merged_front_size']} total_n_fe={summary['total_n_fe']} "
                  f"pf={cfg.pf_path}")
        elif args.command == "compare":
            res = cmd_compare(args.front_a, args.front_b, args.combined, args.match_decisions)
            print(",".join(TABLE_COLUMNS))
            print(",".join(str(v) for v in res.table_row()))
        elif args.command == "enumerate":
            front = cmd_enumerate(load_problem(args.network), args.output, args.limit)
            print(f"front_size={len(front)} pf={args.output}")
        elif args.command == "evaluate":
            problem = load_problem(args.network, uniformity=not args.no_uniformity)
            if args.decision is not None:
                decision = _csv_ints(args.decision)
            else:
                if not isinstance(problem, WDSProblem):
                    raise CLIError(EXIT_CONFIG, "--diameters-mm needs a network problem")
                decision = decision_from_diameters(problem, _csv_floats(args.diameters_mm))
            print(cmd_evaluate(problem, decision))
    except CLIError as exc:
        print(f"mopsoplus: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
