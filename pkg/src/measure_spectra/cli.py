"""Command-line interface: ``measure-spectra {green,solve,oracle,converge,compare}``.

Exit codes: 0 success, 1 numerical failure, 2 input/config error,
3 success but the spectral search was truncated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from measure_spectra import __version__
from measure_spectra.config import (
    ConfigError,
    build_measure,
    build_plan,
    build_solver,
    load_config,
)
from measure_spectra.green import KernelParams, RegimeError, free_green, green_eval
from measure_spectra.harness import compare_tables, read_rows_csv, rows_to_csv, run_convergence
from measure_spectra.measure import RNG_NAME
from measure_spectra.oracle import CircleSpec, circle_spectrum
from measure_spectra.spectral import SchroedingerProblem, find_spectrum

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_INPUT = 2
EXIT_TRUNCATED = 3

logger = logging.getLogger("measure_spectra")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _tool() -> dict[str, str]:
    return {"name": "measure-spectra", "version": __version__}


def _workers(threads: int) -> int:
    return threads if threads > 0 else (os.cpu_count() or 1)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json_text(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_green(args) -> int:
    if not args.r:
        raise ConfigError("green needs at least one r value")
    try:
        params = KernelParams(args.dim, args.epsilon, args.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.epsilon == 0:
        raise ConfigError("green needs epsilon > 0 (4*eps^2*alpha < 1)")
    if params.discriminant <= 0:
        raise ConfigError(
            f"4*eps^2*alpha = {1 - params.discriminant:.6g} violates 4*eps^2*alpha < 1"
        )
    r = np.asarray(args.r, dtype=float)
    if np.any(r < 0):
        raise ConfigError("r values must be nonnegative")
    g = np.atleast_1d(green_eval(params, r))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["r", "g_eps", "g_free"])
    for ri, gi in zip(r, g):
        if ri == 0 and args.dim in (2, 3):
            free = "inf"
        else:
            free = repr(float(free_green(args.dim, args.alpha, ri)))
        writer.writerow([repr(float(ri)), repr(float(gi)), free])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _load(args) -> dict[str, Any]:
    if args.config is None:
        raise ConfigError(f"{args.command} needs --config PATH")
    return load_config(args.config)


def cmd_solve(args) -> int:
    config = _load(args)
    if "epsilon" not in config:
        raise ConfigError("solve needs 'epsilon' in the config")
    try:
        measure = build_measure(config["measure"], args.seed)
        problem = SchroedingerProblem(measure, config["epsilon"])
        solver = build_solver(config, _workers(args.threads))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    result = find_spectrum(problem, solver)
    include_basis = config.get("output", {}).get("include_basis", True)
    payload = result.to_dict(include_basis=include_basis)
    payload["tool"] = _tool()
    payload["config"] = config
    payload["solver"] = asdict(solver)
    payload["rng"] = {
        "generator": measure.metadata.get("generator", RNG_NAME),
        "seed": measure.metadata.get("seed"),
    }
    payload["measure"] = measure.to_dict()
    _emit(_json_text(payload), args.out)
    return EXIT_TRUNCATED if result.truncated else EXIT_OK


def cmd_oracle(args) -> int:
    radius, gamma = args.R, args.gamma
    if args.config is not None:
        entry = load_config(args.config)["measure"]
        if entry["kind"] != "circle":
            raise ConfigError("oracle needs a circle measure")
        radius, gamma = entry["R"], entry["gamma"]
    if radius is None or gamma is None:
        raise ConfigError("oracle needs --R and --gamma (or a circle config)")
    try:
        spectrum = circle_spectrum(CircleSpec(radius, gamma))
    except OverflowError as exc:
        raise ConfigError(str(exc)) from None
    levels = [level.to_dict() for level in spectrum.levels]
    if args.format == "json":
        payload = {
            "tool": _tool(),
            "config": {"R": radius, "gamma": gamma},
            "rng": None,
            "levels": levels,
            "count": spectrum.count,
        }
        _emit(_json_text(payload), args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l", "kappa", "energy", "multiplicity"])
        for lev in levels:
            writer.writerow([lev["l"], repr(lev["kappa"]), repr(lev["energy"]), lev["multiplicity"]])
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    config = _load(args)
    plan = build_plan(config, args.seed, _workers(args.threads))
    start = time.perf_counter()
    rows = run_convergence(plan)
    elapsed = time.perf_counter() - start
    _emit(rows_to_csv(rows), args.out)
    if args.out not in (None, "-"):
        meta = {
            "tool": _tool(),
            "config": config,
            "solver": asdict(plan.solver),
            "rng": {"generator": RNG_NAME, "seed": plan.seed, "sampling": plan.sampling},
            "columns": "epsilon,N,level,energy,multiplicity,oracle_energy,abs_error,flags",
            "wall_time": {
                "total": elapsed,
                "cells": sorted({(r.epsilon, r.N): r.wall_time for r in rows}.items()),
            },
        }
        Path(str(args.out) + ".meta.json").write_text(_json_text(meta), encoding="utf-8")
    return EXIT_TRUNCATED if any("truncated" in r.flags for r in rows) and args.strict else EXIT_OK


def cmd_compare(args) -> int:
    try:
        run_a = read_rows_csv(Path(args.run_a).read_text(encoding="utf-8"))
        run_b = read_rows_csv(Path(args.run_b).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(str(exc)) from None
    summary = compare_tables(run_a, run_b)
    summary["tool"] = _tool()
    summary["inputs"] = [str(args.run_a), str(args.run_b)]
    _emit(_json_text(_jsonable(summary)), args.out)
    return EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--threads", type=int, default=1, metavar="K", help="worker threads, 0 = auto")
    common.add_argument("--seed", type=int, default=None, metavar="U64", help="RNG seed override")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="measure-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("green", parents=[common], help="tabulate the Green kernel")
    p.add_argument("--dim", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("solve", parents=[common], help="negative spectrum of one problem")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", parents=[common], help="exact circle spectrum")
    p.add_argument("--R", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("converge", parents=[common], help="convergence table as CSV")
    p.add_argument(
        "--strict", action="store_true", help="exit 3 if any cell was truncated"
    )
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("compare", parents=[common], help="compare two convergence CSVs")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, RegimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
