"""Command-line workbench.

Subcommands: ``table`` (one result row per dimension), ``solve`` (one
engine, one cell), ``simulate`` (Monte Carlo cross-validation of a
strategy file), ``verify`` (invariant suite).

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 solver
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import bell, classical, npa, pm, simulate, verify
from .game import GameSpec
from .serialize import SCHEMA_VERSION, fraction_to_json, load_strategy

__all__ = ["main"]

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_SOLVER = 3

TASKS = ("classical", "tqs", "eacc", "ml", "qbound")
CSV_COLUMNS = ("d", "classical", "tqs_lb", "eacc_lb", "ml", "qbound_1ab",
               "gap")
HEAVY_SEESAW_D = 9  # see-saw columns need --allow-heavy from here up
TABLE_QBOUND_MAX_D = 4  # product-moment bound included in table rows up to here


class UsageError(Exception):
    pass


class SolverError(Exception):
    pass


def _parse_d_range(text: str) -> list:
    """Accept 'a-b', 'a:b' or a single integer."""
    for sep in ("-", ":"):
        if sep in text:
            lo_s, hi_s = text.split(sep, 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo > hi:
                raise UsageError(f"empty dimension range {text!r}")
            return list(range(lo, hi + 1))
    return [int(text)]


def _read_config(path: str) -> dict:
    """Flat key=value file; '#' starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(
                        f"{path}:{lineno}: expected key=value, got {raw!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    return values

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccplab",
        description="Workbench for a d-dimensional communication game: "
                    "classical, quantum-transmission, entanglement-assisted "
                    "and macroscopic-locality values.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--d", type=int, default=None,
                       help="single dimension (2..11)")
        p.add_argument("--d-range", default=None,
                       help="inclusive dimension range, e.g. 2-8")
        p.add_argument("--restarts", type=int, default=None,
                       help="see-saw restarts (default 20)")
        p.add_argument("--seed", type=int, default=None,
                       help="base RNG seed (default 0)")
        p.add_argument("--max-iters", type=int, default=None,
                       help="see-saw iteration cap (default 200)")
        p.add_argument("--conv-tol", type=float, default=None,
                       help="see-saw convergence tolerance (default 1e-8)")
        p.add_argument("--format", choices=("json", "csv"), default=None,
                       help="output format (default json)")
        p.add_argument("--out", default=None,
                       help="output file (default stdout)")
        p.add_argument("--config", default=None,
                       help="flat key=value config file; flags override it")
        p.add_argument("--allow-heavy", action="store_true", default=None,
                       help="unlock d=6 exhaustive classical search and "
                            "d>=9 see-saws")

    p_table = sub.add_parser("table", help="one result row per dimension")
    common(p_table)

    p_solve = sub.add_parser("solve", help="run one engine for one d")
    common(p_solve)
    p_solve.add_argument("--task", choices=TASKS, default=None,
                         help="engine to run")

    p_sim = sub.add_parser("simulate",
                           help="Monte Carlo estimate for a strategy file")
    common(p_sim)
    p_sim.add_argument("strategy", help="strategy JSON file")
    p_sim.add_argument("--rounds", type=int, default=None,
                       help="number of sampled games (default 100000)")

    p_verify = sub.add_parser("verify", help="run the invariant suite")
    common(p_verify)
    return parser


_DEFAULTS = {
    "restarts": 20,
    "seed": 0,
    "max_iters": 200,
    "conv_tol": 1e-8,
    "format": "json",
    "allow_heavy": False,
    "rounds": 100_000,
}

_CONFIG_PARSERS = {
    "d": int,
    "d_range": str,
    "task": str,
    "restarts": int,
    "seed": int,
    "max_iters": int,
    "conv_tol": float,
    "format": str,
    "out": str,
    "rounds": int,
    "allow_heavy": lambda v: v.lower() in ("1", "true", "yes", "on"),
}


def _resolve_options(args: argparse.Namespace) -> argparse.Namespace:
    """Layer defaults < config file < explicit flags."""
    config = _read_config(args.config) if args.config else {}
    for key, raw in config.items():
        if key == "config":
            continue
        if key not in _CONFIG_PARSERS:
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key, None) is None:
            try:
                setattr(args, key, _CONFIG_PARSERS[key](raw))
            except ValueError as exc:
                raise UsageError(f"bad config value {key}={raw!r}") from exc
    for key, value in _DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if args.format not in ("json", "csv"):
        raise UsageError(f"unknown format {args.format!r}")
    return args


def _dimensions(args: argparse.Namespace, default=None) -> list:
    if args.d is not None and args.d_range is not None:
        raise UsageError("give either --d or --d-range, not both")
    if args.d is not None:
        ds = [args.d]
    elif args.d_range is not None:
        ds = _parse_d_range(args.d_range)
    elif default is not None:
        ds = list(default)
    else:
        raise UsageError("a dimension is required (--d or --d-range)")
    for d in ds:
        if not 2 <= d <= 11:
            raise UsageError(f"dimension {d} outside the supported range "
                             f"2..11")
    return ds


def _emit(args: argparse.Namespace, document: dict, rows=None) -> None:
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS,
                                extrasaction="ignore")
        writer.writeheader()
        for row in rows or []:
            writer.writerow({k: ("" if row.get(k) is None else row[k])
                             for k in CSV_COLUMNS})
        text = buf.getvalue()
    else:
        text = json.dumps(document, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- engines

def _cell_classical(d: int, args) -> dict:
    spec = GameSpec(d)
    t0 = time.perf_counter()
    if d <= 6:
        # d = 6 raises SearchSpaceError unless allow_heavy is set
        sol = classical.classical_optimum(spec, allow_heavy=args.allow_heavy)
        value, method = sol.value, "exhaustive"
        extra = {"ties": sol.ties,
                 "message": [list(r) for r in sol.message.table]}
    else:
        from .game import LinearStrategy
        strat = LinearStrategy((0, 0), (0, 0))
        value = classical.linear_strategy_value(spec, strat)
        method, extra = "linear-strategy floor", {}
    return {
        "value": float(value),
        "exact": fraction_to_json(value),
        "certificate": "exact optimum" if method == "exhaustive"
        else "explicit-strategy lower bound",
        "direction": "exact" if method == "exhaustive" else "lower",
        "method": method,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        **extra,
    }


def _cell_tqs(d: int, args) -> dict:
    t0 = time.perf_counter()
    value, _, traces = pm.run_pm(GameSpec(d), restarts=args.restarts,
                                 seed=args.seed, max_iters=args.max_iters,
                                 conv_tol=args.conv_tol)
    return {
        "value": value,
        "certificate": "explicit-strategy lower bound",
        "direction": "lower",
        "seed": args.seed,
        "restarts": args.restarts,
        "converged_restarts": sum(t.converged for t in traces),
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }


def _cell_eacc(d: int, args) -> dict:
    t0 = time.perf_counter()
    value, _, traces = bell.run_bell(GameSpec(d), restarts=args.restarts,
                                     seed=args.seed,
                                     max_iters=args.max_iters,
                                     conv_tol=args.conv_tol)
    return {
        "value": value,
        "certificate": "explicit-strategy lower bound",
        "direction": "lower",
        "seed": args.seed,
        "restarts": args.restarts,
        "converged_restarts": sum(t.converged for t in traces),
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }


def _cell_bound(d: int, level: str) -> dict:
    t0 = time.perf_counter()
    report = npa.upper_bound(d, level)
    return {
        "value": report.value,
        "certificate": "dual-certified upper bound",
        "direction": "upper",
        "level": level,
        "relaxation_value": report.relaxation_value,
        "primal_residual": report.solution.primal_residual,
        "dual_residual": report.solution.dual_residual,
        "solver_status": report.solution.status,
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }


_ENGINES = {
    "classical": _cell_classical,
    "tqs": _cell_tqs,
    "eacc": _cell_eacc,
    "ml": lambda d, args: _cell_bound(d, "1"),
    "qbound": lambda d, args: _cell_bound(d, "1+AB"),
}


def _run_engine(task: str, d: int, args) -> dict:
    try:
        return _ENGINES[task](d, args)
    except (classical.SearchSpaceError, ValueError) as exc:
        raise UsageError(f"task={task} d={d}: {exc}") from exc
    except RuntimeError as exc:
        raise SolverError(f"task={task} d={d}: {exc}") from exc


# ------------------------------------------------------------- commands

def cmd_solve(args) -> int:
    if args.task is None:
        raise UsageError("solve requires --task")
    (d,) = _dimensions(args)  # exactly one dimension
    if args.d_range is not None:
        raise UsageError("solve takes --d, not --d-range")
    cell = _run_engine(args.task, d, args)
    document = {"schema": SCHEMA_VERSION, "kind": "cell", "task": args.task,
                "d": d, **cell}
    if args.task == "classical":
        exact = cell["exact"]
        print(f"# classical d={d}: "
              f"{exact['numerator']}/{exact['denominator']} "
              f"= {exact['decimal']}", file=sys.stderr)
    _emit(args, document, rows=[{"d": d, _CSV_KEY[args.task]: cell["value"]}])
    return EXIT_OK


_CSV_KEY = {"classical": "classical", "tqs": "tqs_lb", "eacc": "eacc_lb",
            "ml": "ml", "qbound": "qbound_1ab"}


def cmd_table(args) -> int:
    ds = _dimensions(args, default=range(2, 8))
    rows = []
    for d in ds:
        row = {"d": d, "provenance": {"seed": args.seed,
                                      "restarts": args.restarts}}
        heavy_gated = d >= HEAVY_SEESAW_D and not args.allow_heavy
        tasks = ["classical", "ml"]
        if heavy_gated:
            row["note"] = (f"tqs/eacc at d={d} are compute-heavy; "
                           f"rerun with --allow-heavy")
        else:
            tasks += ["tqs", "eacc"]
        if d <= TABLE_QBOUND_MAX_D:
            tasks.append("qbound")
        for task in tasks:
            try:
                cell = _ENGINES[task](d, args)
            except Exception as exc:  # per-cell failures stay in-row
                row.setdefault("errors", {})[task] = str(exc)
                continue
            key = _CSV_KEY[task]
            row[key] = cell["value"]
            row["provenance"][key] = {
                k: v for k, v in cell.items() if k != "value"}
        if "tqs_lb" in row and "eacc_lb" in row:
            row["gap"] = row["tqs_lb"] - row["eacc_lb"]
        rows.append(row)
    document = {"schema": SCHEMA_VERSION, "kind": "table", "rows": rows}
    _emit(args, document, rows=rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        strategy = load_strategy(args.strategy)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load strategy file: {exc}") from exc
    d = getattr(strategy, "d")
    if args.d is not None and args.d != d:
        raise UsageError(f"--d {args.d} contradicts strategy dimension {d}")
    rng = np.random.default_rng(args.seed)
    result = simulate.simulate(GameSpec(d), strategy, args.rounds, rng)
    document = {
        "schema": SCHEMA_VERSION, "kind": "simulation", "d": d,
        "rounds": result.rounds, "mean": result.mean,
        "stderr": result.stderr, "seed": args.seed,
    }
    _emit(args, document, rows=[{"d": d}])
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_checks(seed=args.seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}", file=sys.stderr)
    document = {
        "schema": SCHEMA_VERSION, "kind": "verification",
        "passed": not failed,
        "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail}
                   for r in results],
    }
    _emit(args, document, rows=[])
    return EXIT_VERIFY if failed else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _resolve_options(args)
        handler = {"table": cmd_table, "solve": cmd_solve,
                   "simulate": cmd_simulate, "verify": cmd_verify}
        return handler[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
