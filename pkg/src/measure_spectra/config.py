"""JSON configuration: schema, validation and construction of library objects."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from measure_spectra.measure import (
    CircleMeasure,
    CurveMeasure,
    ExplicitMeasure,
    IntervalDensity,
    MeasureSpec,
    PointMeasure,
    discretize,
    sample_random,
)
from measure_spectra.spectral import SolverOptions

__all__ = [
    "CONFIG_SCHEMA",
    "ConfigError",
    "build_measure",
    "build_plan",
    "build_solver",
    "build_spec",
    "load_config",
    "validate_config",
]


class ConfigError(ValueError):
    pass


_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_COUNT = {"type": "integer", "minimum": 1}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1, "maxItems": 3}

_SPEC_VARIANTS = [
    {
        "type": "object",
        "properties": {
            "kind": {"const": "circle"},
            "R": _POSITIVE,
            "gamma": _POSITIVE,
            "N": _COUNT,
        },
        "required": ["kind", "R", "gamma"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "interval_density"},
            "a": _NUMBER,
            "b": _NUMBER,
            "density": _NUMBER,
            "N": _COUNT,
        },
        "required": ["kind", "a", "b", "density"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "polyline"},
            "dim": {"enum": [1, 2, 3]},
            "vertices": {"type": "array", "items": _VECTOR, "minItems": 2},
            "density": _NUMBER,
            "closed": {"type": "boolean"},
            "N": _COUNT,
        },
        "required": ["kind", "dim", "vertices", "density"],
        "additionalProperties": False,
    },
    {
        "type": "object",
        "properties": {
            "kind": {"const": "explicit"},
            "dim": {"enum": [1, 2, 3]},
            "sites": {"type": "array", "items": _VECTOR, "minItems": 1},
            "couplings": {"type": "array", "items": _NUMBER, "minItems": 1},
        },
        "required": ["kind", "dim", "sites", "couplings"],
        "additionalProperties": False,
    },
]

_RANDOM = {
    "type": "object",
    "properties": {
        "kind": {"const": "random"},
        "base": {"oneOf": _SPEC_VARIANTS},
        "n": _COUNT,
        "a": _NUMBER,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
    "required": ["kind", "base", "n", "a"],
    "additionalProperties": False,
}

_SOLVER = {
    "type": "object",
    "properties": {
        "grid_per_decade": {"type": "integer", "minimum": 2},
        "tol_root": _POSITIVE,
        "tol_cluster": {"type": "number", "minimum": 0},
        "alpha_min": _POSITIVE,
        "tol_residual": _POSITIVE,
        "method": {"enum": ["auto", "dense", "circulant"]},
    },
    "additionalProperties": False,
}

_EXPERIMENT = {
    "type": "object",
    "properties": {
        "epsilon_list": {"type": "array", "items": _POSITIVE, "minItems": 1},
        "n_list": {"type": "array", "items": _COUNT, "minItems": 1},
        "oracle": {"enum": ["circle", "delta", "square_well", None]},
        "sampling": {"enum": ["midpoint", "random"]},
        "random_total": _NUMBER,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
    "required": ["epsilon_list", "n_list"],
    "additionalProperties": False,
}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "measure": {"oneOf": _SPEC_VARIANTS + [_RANDOM]},
        "epsilon": _POSITIVE,
        "solver": _SOLVER,
        "experiment": _EXPERIMENT,
        "output": {
            "type": "object",
            "properties": {"include_basis": {"type": "boolean"}},
            "additionalProperties": False,
        },
    },
    "required": ["measure"],
    "additionalProperties": False,
}


def validate_config(config: Any) -> dict[str, Any]:
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    return config


def load_config(path: str | Path) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return validate_config(config)


def _polyline(entry: dict[str, Any]) -> CurveMeasure:
    dim = entry["dim"]
    verts = np.asarray(entry["vertices"], dtype=float)
    if verts.shape[1] != dim:
        raise ConfigError(f"polyline vertices must have {dim} coordinates")
    if entry.get("closed", False):
        verts = np.vstack([verts, verts[:1]])
    seg = np.linalg.norm(np.diff(verts, axis=0), axis=1)
    if np.any(seg == 0):
        raise ConfigError("polyline has repeated consecutive vertices")
    knots = np.concatenate([[0.0], np.cumsum(seg)])
    density = float(entry["density"])

    def path(s):
        s = np.asarray(s, dtype=float)
        return np.column_stack([np.interp(s, knots, verts[:, k]) for k in range(dim)])

    def dens(s):
        return np.full(np.shape(s), density)

    return CurveMeasure(dim=dim, path=path, density=dens, length=float(knots[-1]), label="polyline")


def build_spec(entry: dict[str, Any]) -> MeasureSpec:
    kind = entry["kind"]
    if kind == "circle":
        return CircleMeasure(float(entry["R"]), float(entry["gamma"]))
    if kind == "interval_density":
        value = float(entry["density"])
        if not entry["a"] < entry["b"]:
            raise ConfigError("interval_density needs a < b")
        return IntervalDensity(
            float(entry["a"]), float(entry["b"]), lambda x: np.full(np.shape(x), value),
            label=f"constant({value!r})",
        )
    if kind == "polyline":
        return _polyline(entry)
    if kind == "explicit":
        return ExplicitMeasure(
            PointMeasure(entry["dim"], np.asarray(entry["sites"], dtype=float), entry["couplings"])
        )
    raise ConfigError(f"unknown measure kind {kind!r}")


def build_measure(entry: dict[str, Any], seed: Optional[int] = None) -> PointMeasure:
    """Point measure for ``solve``: explicit, discretized with the entry's N, or random."""
    if entry["kind"] == "random":
        use_seed = seed if seed is not None else entry.get("seed", 0)
        return sample_random(build_spec(entry["base"]), entry["n"], entry["a"], use_seed)
    spec = build_spec(entry)
    if isinstance(spec, ExplicitMeasure):
        return spec.measure
    if "N" not in entry:
        raise ConfigError(f"measure kind {entry['kind']!r} needs N to be discretized")
    return discretize(spec, entry["N"])


def build_solver(config: dict[str, Any], workers: int = 1) -> SolverOptions:
    return SolverOptions(workers=workers, **config.get("solver", {}))


def build_plan(config: dict[str, Any], seed: Optional[int] = None, workers: int = 1):
    from measure_spectra.harness import ExperimentPlan

    if "experiment" not in config:
        raise ConfigError("converge needs an 'experiment' section")
    exp = config["experiment"]
    entry = config["measure"]
    sampling = exp.get("sampling", "midpoint")
    random_total = exp.get("random_total")
    if entry["kind"] == "random":
        sampling = "random"
        random_total = entry["a"]
        entry = entry["base"]
    use_seed = seed if seed is not None else exp.get("seed", config["measure"].get("seed", 0))
    try:
        return ExperimentPlan(
            spec=build_spec(entry),
            epsilon_list=tuple(exp["epsilon_list"]),
            n_list=tuple(exp["n_list"]),
            solver=build_solver(config, workers),
            oracle=exp.get("oracle"),
            sampling=sampling,
            seed=use_seed,
            random_total=random_total,
            workers=workers,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
