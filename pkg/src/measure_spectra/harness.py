"""Convergence experiments: discretize a measure, solve, compare with exact levels.

Rows are matched to reference levels by sorted order, counting multiplicity.
Eigenvalues that provably lie beyond the searchable window (below -α_cap)
are emitted as one row at energy -α_cap flagged ``beyond_cap``; for those
rows the energy is an upper bound and ``abs_error`` a lower bound.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from scipy import optimize

from measure_spectra.measure import (
    CircleMeasure,
    ExplicitMeasure,
    IntervalDensity,
    MeasureSpec,
    discretize,
    sample_random,
)
from measure_spectra.oracle import CircleSpec, circle_spectrum
from measure_spectra.spectral import SchroedingerProblem, SolverOptions, find_spectrum

__all__ = [
    "CSV_COLUMNS",
    "ConvergenceRow",
    "ExperimentPlan",
    "compare_tables",
    "matched_level_errors",
    "read_rows_csv",
    "reference_energies",
    "rows_to_csv",
    "run_convergence",
    "run_epsilon_sweep",
    "single_delta_energy",
    "square_well_energies",
]

CSV_COLUMNS = (
    "epsilon",
    "N",
    "level",
    "energy",
    "multiplicity",
    "oracle_energy",
    "abs_error",
    "flags",
)
ORACLES = ("circle", "delta", "square_well")


@dataclass(frozen=True)
class ExperimentPlan:
    spec: MeasureSpec
    epsilon_list: tuple[float, ...]
    n_list: tuple[int, ...]
    solver: SolverOptions = field(default_factory=SolverOptions)
    oracle: Optional[str] = None
    sampling: str = "midpoint"
    seed: int = 0
    random_total: Optional[float] = None
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilon_list)
        ns = tuple(int(n) for n in self.n_list)
        if not eps or not ns:
            raise ValueError("epsilon_list and n_list must be nonempty")
        if any(e <= 0 for e in eps) or any(n < 1 for n in ns):
            raise ValueError("epsilons must be positive and N at least 1")
        if list(eps) != sorted(eps) or list(ns) != sorted(ns):
            raise ValueError("epsilon_list and n_list must be sorted ascending")
        if self.oracle is not None and self.oracle not in ORACLES:
            raise ValueError(f"oracle must be one of {ORACLES} or None")
        if self.sampling not in ("midpoint", "random"):
            raise ValueError("sampling must be 'midpoint' or 'random'")
        object.__setattr__(self, "epsilon_list", eps)
        object.__setattr__(self, "n_list", ns)


@dataclass
class ConvergenceRow:
    epsilon: float
    N: int
    level: int
    energy: float
    multiplicity: int
    oracle_energy: Optional[float] = None
    abs_error: Optional[float] = None
    flags: tuple[str, ...] = ()
    wall_time: float = 0.0

    def key(self) -> tuple[float, int, int]:
        return (self.epsilon, self.N, self.level)


# ---------------------------------------------------------------------------
# reference spectra


def single_delta_energy(coupling: float) -> float:
    """Bound state of -d²/dx² + c δ(x), c < 0: energy -c²/4."""
    if not coupling < 0:
        raise ValueError("a single delta binds only for negative coupling")
    return -(coupling**2) / 4.0


def square_well_energies(depth: float, width: float) -> list[float]:
    """Bound states of -d²/dx² - depth on an interval of given width (d = 1).

    With L the half-width, θ = kL and ρ = √depth·L the even states solve
    θ tan θ = √(ρ² - θ²) and the odd ones -θ cot θ = √(ρ² - θ²).
    """
    if not (depth > 0 and width > 0):
        raise ValueError("square well needs positive depth and width")
    half = width / 2.0
    rho = math.sqrt(depth) * half
    out = []
    n = 0
    tiny = 1e-15
    while n * math.pi / 2.0 < rho:
        lo = n * math.pi / 2.0 + tiny
        hi = min((n + 1) * math.pi / 2.0 - tiny, rho)
        if n % 2 == 0:
            f = lambda t: t * math.tan(t) - math.sqrt(max(rho * rho - t * t, 0.0))  # noqa: E731
        else:
            f = lambda t: -t / math.tan(t) - math.sqrt(max(rho * rho - t * t, 0.0))  # noqa: E731
        if f(lo) < 0 < f(hi):
            theta = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
            kappa = math.sqrt(max(rho * rho - theta * theta, 0.0)) / half
            if kappa > 0:
                out.append(-(kappa**2))
        n += 1
    return sorted(out)


def reference_energies(plan: ExperimentPlan) -> Optional[list[float]]:
    """Exact energies (ascending, repeated by multiplicity) of the limit operator, if known."""
    if plan.oracle is None:
        return None
    spec = plan.spec
    if plan.oracle == "circle":
        if not isinstance(spec, CircleMeasure):
            raise ValueError("circle oracle needs a circle measure")
        return circle_spectrum(CircleSpec(spec.radius, spec.gamma)).energies
    if plan.oracle == "delta":
        if not (isinstance(spec, ExplicitMeasure) and spec.measure.n == 1 and spec.measure.dim == 1):
            raise ValueError("delta oracle needs a single-site d=1 explicit measure")
        return [single_delta_energy(float(spec.measure.couplings[0]))]
    if not isinstance(spec, IntervalDensity):
        raise ValueError("square_well oracle needs an interval density")
    xs = np.linspace(spec.a, spec.b, 65)[1:-1]
    values = np.asarray(spec.density(xs), dtype=float)
    if not np.allclose(values, values[0], rtol=1e-12, atol=0) or values[0] >= 0:
        raise ValueError("square_well oracle needs a constant negative density")
    return square_well_energies(-float(values[0]), spec.b - spec.a)


# ---------------------------------------------------------------------------
# experiment cells


def _measure_for(plan: ExperimentPlan, n: int):
    if plan.sampling == "random":
        total = plan.random_total
        if total is None:
            raise ValueError("random sampling needs random_total")
        return sample_random(plan.spec, n, total, plan.seed)
    return discretize(plan.spec, n)


def _cell_rows(
    plan: ExperimentPlan, epsilon: float, n: int, reference: Optional[list[float]]
) -> list[ConvergenceRow]:
    start = time.perf_counter()
    measure = _measure_for(plan, n)
    problem = SchroedingerProblem(measure, epsilon)
    result = find_spectrum(problem, plan.solver)
    elapsed = time.perf_counter() - start

    levels: list[tuple[float, int, tuple[str, ...]]] = []
    missing = result.metadata["missing_above"]
    if missing:
        levels.append((-result.metadata["alpha_cap"], missing, ("beyond_cap",)))
    for rec in sorted(result.eigenvalues, key=lambda r: r.energy):
        levels.append((rec.energy, rec.multiplicity, ()))

    common: list[str] = []
    if result.truncated:
        common.append("truncated")
    total = sum(m for _, m, _ in levels)
    if reference is not None and total != len(reference):
        common.append("count_mismatch")

    rows = []
    slot = 0
    for index, (energy, mult, own) in enumerate(levels):
        flags = list(own) + common
        oracle_energy = abs_error = None
        if reference is not None:
            if slot < len(reference):
                oracle_energy = reference[slot]
                abs_error = abs(energy - oracle_energy)
            else:
                flags.append("unmatched")
        rows.append(
            ConvergenceRow(
                epsilon=epsilon,
                N=n,
                level=index,
                energy=energy,
                multiplicity=mult,
                oracle_energy=oracle_energy,
                abs_error=abs_error,
                flags=tuple(flags),
                wall_time=elapsed,
            )
        )
        slot += mult
    return rows


def _run_cells(plan: ExperimentPlan, cells: Sequence[tuple[float, int]]) -> list[ConvergenceRow]:
    reference = reference_energies(plan)

    def job(cell):
        return _cell_rows(plan, cell[0], cell[1], reference)

    if plan.workers == 1 or len(cells) < 2:
        chunks = [job(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=plan.workers if plan.workers > 0 else None) as pool:
            chunks = list(pool.map(job, cells))
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=ConvergenceRow.key)
    return rows


def run_convergence(plan: ExperimentPlan) -> list[ConvergenceRow]:
    """Solve every (ε, N) cell of the plan; rows sorted by (ε, N, level)."""
    return _run_cells(plan, [(e, n) for e in plan.epsilon_list for n in plan.n_list])


def run_epsilon_sweep(plan: ExperimentPlan) -> list[ConvergenceRow]:
    """Fix each discretized measure and let ε decrease through ``epsilon_list``.

    Identical cells to :func:`run_convergence`; the cells are visited from the
    largest ε down so progress logs read as the ε -> 0 trajectory.  For the
    d = 1 ``delta`` and ``square_well`` references the ε = 0 energies are attached.
    """
    cells = [(e, n) for n in plan.n_list for e in sorted(plan.epsilon_list, reverse=True)]
    return _run_cells(plan, cells)


def matched_level_errors(
    rows: Sequence[ConvergenceRow], epsilon: float, n: int, reference: Sequence[float]
) -> list[float]:
    """Error per reference state: |approx - exact| for the approximate level covering it.

    The result has one entry per reference state (expanded by multiplicity);
    states without an approximate partner get ``inf``.
    """
    errors = [math.inf] * len(reference)
    slot = 0
    for row in sorted((r for r in rows if r.epsilon == epsilon and r.N == n), key=lambda r: r.level):
        for j in range(slot, min(slot + row.multiplicity, len(reference))):
            errors[j] = abs(row.energy - reference[j])
        slot += row.multiplicity
    return errors


# ---------------------------------------------------------------------------
# tables


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                _fmt(float(row.epsilon)),
                _fmt(int(row.N)),
                _fmt(int(row.level)),
                _fmt(float(row.energy)),
                _fmt(int(row.multiplicity)),
                _fmt(None if row.oracle_energy is None else float(row.oracle_energy)),
                _fmt(None if row.abs_error is None else float(row.abs_error)),
                ";".join(row.flags),
            ]
        )
    return buf.getvalue()


def read_rows_csv(text: str) -> list[ConvergenceRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(
            ConvergenceRow(
                epsilon=float(rec["epsilon"]),
                N=int(rec["N"]),
                level=int(rec["level"]),
                energy=float(rec["energy"]),
                multiplicity=int(rec["multiplicity"]),
                oracle_energy=float(rec["oracle_energy"]) if rec["oracle_energy"] else None,
                abs_error=float(rec["abs_error"]) if rec["abs_error"] else None,
                flags=tuple(f for f in rec["flags"].split(";") if f),
            )
        )
    return rows


def _stats(values: list[float]) -> dict[str, Optional[float]]:
    if not values:
        return {"max": None, "median": None}
    return {"max": max(values), "median": statistics.median(values)}


def compare_tables(
    run_a: Sequence[ConvergenceRow], run_b: Sequence[ConvergenceRow]
) -> dict[str, Any]:
    """Per-level deltas between two runs of the same plan shape.

    For every level index: max/median of |E_b - E_a| over the (ε, N) cells, and
    of the signed error change err_b - err_a where both runs carry errors.
    """
    keys_a = {r.key(): r for r in run_a}
    keys_b = {r.key(): r for r in run_b}
    if keys_a.keys() != keys_b.keys():
        raise ValueError("runs differ in shape: (epsilon, N, level) keys do not match")
    per_level: dict[int, dict[str, list[float]]] = {}
    for key, ra in keys_a.items():
        rb = keys_b[key]
        bucket = per_level.setdefault(key[2], {"energy": [], "error": []})
        bucket["energy"].append(abs(rb.energy - ra.energy))
        if ra.abs_error is not None and rb.abs_error is not None:
            bucket["error"].append(rb.abs_error - ra.abs_error)
    levels = {
        level: {
            "energy_delta": _stats(b["energy"]),
            "error_delta": _stats(b["error"]),
            "cells": len(b["energy"]),
        }
        for level, b in sorted(per_level.items())
    }
    all_energy = [v for b in per_level.values() for v in b["energy"]]
    all_error = [v for b in per_level.values() for v in b["error"]]
    return {
        "levels": levels,
        "energy_delta": _stats(all_energy),
        "error_delta": _stats(all_error),
        "rows": len(keys_a),
    }
