"""Finite signed point measures and the discretizers that produce them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Union

import numpy as np
from scipy import integrate
from scipy.spatial import distance

__all__ = [
    "SEP_TOL",
    "CircleMeasure",
    "CurveMeasure",
    "ExplicitMeasure",
    "IntervalDensity",
    "MeasureSpec",
    "PointMeasure",
    "discretize",
    "discretize_circle",
    "discretize_curve",
    "discretize_interval",
    "sample_random",
    "weak_distance",
]

SEP_TOL = 1e-9
RNG_NAME = "numpy.random.PCG64"


@dataclass
class PointMeasure:
    """μ = Σ_j c_j δ_{x_j} in d = 1, 2 or 3 dimensions.

    ``sites`` has shape (N, dim), ``couplings`` shape (N,).  Couplings must be
    nonzero and sites pairwise separated by more than ``sep_tol``.
    """

    dim: int
    sites: np.ndarray
    couplings: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)
    sep_tol: float = SEP_TOL

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        sites = np.asarray(self.sites, dtype=float)
        if sites.ndim == 1 and self.dim == 1:
            sites = sites[:, None]
        couplings = np.asarray(self.couplings, dtype=float).reshape(-1)
        if sites.ndim != 2 or sites.shape[1] != self.dim:
            raise ValueError(f"sites must have shape (N, {self.dim}), got {sites.shape}")
        if sites.shape[0] != couplings.shape[0]:
            raise ValueError("sites and couplings differ in length")
        if couplings.size == 0:
            raise ValueError("a point measure needs at least one site")
        if not np.all(np.isfinite(sites)) or not np.all(np.isfinite(couplings)):
            raise ValueError("sites and couplings must be finite")
        if np.any(couplings == 0):
            raise ValueError("couplings must be nonzero")
        self.sites = sites
        self.couplings = couplings
        sep = self.min_separation()
        if sep <= self.sep_tol:
            raise ValueError(
                f"sites closer than sep_tol={self.sep_tol:g} (min separation {sep:.3g})"
            )

    @property
    def n(self) -> int:
        return int(self.couplings.size)

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.couplings)))

    @property
    def mass(self) -> float:
        return float(np.sum(self.couplings))

    def distance_matrix(self) -> np.ndarray:
        return distance.squareform(self.pairwise_distances())

    def pairwise_distances(self) -> np.ndarray:
        """Condensed distances |x_j - x_k| for j < k (``scipy.spatial.distance.pdist`` order)."""
        return distance.pdist(self.sites)

    def min_separation(self) -> float:
        if self.n == 1:
            return math.inf
        return float(self.pairwise_distances().min())

    def fourier(self, p) -> np.ndarray:
        """μ̂(p) = (2π)^{-d/2} Σ_j c_j exp(i p·x_j) at each row of ``p``."""
        p = np.atleast_2d(np.asarray(p, dtype=float))
        if p.shape[1] != self.dim:
            raise ValueError(f"frequency vectors must have length {self.dim}")
        phase = np.exp(1j * (p @ self.sites.T))
        return (2.0 * np.pi) ** (-self.dim / 2.0) * (phase @ self.couplings)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "sites": self.sites.tolist(),
            "couplings": self.couplings.tolist(),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PointMeasure":
        return cls(
            dim=int(data["dim"]),
            sites=np.asarray(data["sites"], dtype=float),
            couplings=np.asarray(data["couplings"], dtype=float),
            metadata=dict(data.get("metadata", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PointMeasure":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# measure specifications


@dataclass(frozen=True)
class CircleMeasure:
    """-γ times arclength on the circle of radius R centred at the origin (d=2)."""

    radius: float
    gamma: float

    def __post_init__(self):
        if not (self.radius > 0 and self.gamma > 0):
            raise ValueError("circle needs R > 0 and gamma > 0")

    def echo(self) -> dict[str, Any]:
        return {"kind": "circle", "R": self.radius, "gamma": self.gamma}


@dataclass(frozen=True)
class CurveMeasure:
    """Density times arclength along a curve.

    ``path(s)`` maps arclength s in [0, length] to a point in R^dim and
    ``density(s)`` gives the (signed) weight per unit length.  Both must accept
    numpy arrays.
    """

    dim: int
    path: Callable[[np.ndarray], np.ndarray]
    density: Callable[[np.ndarray], np.ndarray]
    length: float
    label: str = "curve"

    def __post_init__(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise ValueError("curve length must be positive and finite")

    def echo(self) -> dict[str, Any]:
        return {"kind": "curve", "label": self.label, "dim": self.dim, "length": self.length}


@dataclass(frozen=True)
class IntervalDensity:
    """density(x) dx on [a, b] in d=1."""

    a: float
    b: float
    density: Callable[[np.ndarray], np.ndarray]
    label: str = "interval"

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("interval needs a < b")

    def echo(self) -> dict[str, Any]:
        return {"kind": "interval_density", "label": self.label, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class ExplicitMeasure:
    measure: PointMeasure

    def echo(self) -> dict[str, Any]:
        return {"kind": "explicit", "n": self.measure.n}


MeasureSpec = Union[CircleMeasure, CurveMeasure, IntervalDensity, ExplicitMeasure]


# ---------------------------------------------------------------------------
# deterministic discretizers


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"number of points must be a positive integer, got {n!r}")
    return int(n)


def discretize_circle(radius: float, gamma: float, n: int) -> PointMeasure:
    """N equidistant sites on the circle, each with coupling -2πRγ/N."""
    spec = CircleMeasure(radius, gamma)
    n = _check_n(n)
    theta = 2.0 * np.pi * np.arange(n) / n
    sites = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    couplings = np.full(n, -gamma * 2.0 * np.pi * radius / n)
    return PointMeasure(2, sites, couplings, metadata={"spec": spec.echo(), "N": n})


def discretize_curve(spec: CurveMeasure, n: int) -> PointMeasure:
    """Midpoint rule on N equal-arclength panels.

    Sites whose density vanishes at the panel midpoint are dropped, since a
    point measure carries only nonzero couplings.
    """
    n = _check_n(n)
    h = spec.length / n
    mids = (np.arange(n) + 0.5) * h
    sites = np.asarray(spec.path(mids), dtype=float).reshape(n, spec.dim)
    couplings = np.asarray(spec.density(mids), dtype=float).reshape(n) * h
    keep = couplings != 0
    if not keep.any():
        raise ValueError("density vanishes at every panel midpoint")
    return PointMeasure(
        spec.dim, sites[keep], couplings[keep], metadata={"spec": spec.echo(), "N": n}
    )


def discretize_interval(spec: IntervalDensity, n: int) -> PointMeasure:
    """Midpoint rule for density(x) dx on [a, b]."""
    n = _check_n(n)
    h = (spec.b - spec.a) / n
    mids = spec.a + (np.arange(n) + 0.5) * h
    couplings = np.asarray(spec.density(mids), dtype=float).reshape(n) * h
    keep = couplings != 0
    if not keep.any():
        raise ValueError("density vanishes at every panel midpoint")
    return PointMeasure(
        1, mids[keep, None], couplings[keep], metadata={"spec": spec.echo(), "N": n}
    )


def discretize(spec: MeasureSpec, n: int) -> PointMeasure:
    """Deterministic N-point discretization of any specification."""
    if isinstance(spec, CircleMeasure):
        return discretize_circle(spec.radius, spec.gamma, n)
    if isinstance(spec, CurveMeasure):
        return discretize_curve(spec, n)
    if isinstance(spec, IntervalDensity):
        return discretize_interval(spec, n)
    if isinstance(spec, ExplicitMeasure):
        return spec.measure
    raise TypeError(f"unknown measure specification {type(spec).__name__}")


# ---------------------------------------------------------------------------
# random sampling


def _inverse_cdf_sampler(weight, lo: float, hi: float, grid_size: int = 4096):
    """Tabulated inverse CDF of |weight| on [lo, hi] (piecewise linear)."""
    grid = np.linspace(lo, hi, grid_size + 1)
    w = np.abs(np.asarray(weight(grid), dtype=float))
    if not np.all(np.isfinite(w)):
        raise ValueError("density is not finite on its domain")
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]) * np.diff(grid))])
    total = cdf[-1]
    if not total > 0:
        raise ValueError("density is not normalizable (zero total mass)")
    cdf /= total

    def sample(u: np.ndarray) -> np.ndarray:
        return np.interp(u, cdf, grid)

    return sample


def _merge_coincident(sites: np.ndarray, couplings: np.ndarray, tol: float):
    """Merge sites closer than ``tol`` (exact repeats from atom sampling), summing couplings."""
    order = np.lexsort(sites.T[::-1])
    sites, couplings = sites[order], couplings[order]
    keep_sites = [sites[0]]
    keep_c = [couplings[0]]
    for x, c in zip(sites[1:], couplings[1:]):
        if np.linalg.norm(x - keep_sites[-1]) <= tol:
            keep_c[-1] += c
        else:
            keep_sites.append(x)
            keep_c.append(c)
    return np.array(keep_sites), np.array(keep_c)


def sample_random(spec: MeasureSpec, n: int, a: float, seed: int) -> PointMeasure:
    """n i.i.d. sites drawn from the normalised |spec|, each carrying a/n.

    Atoms of an explicit specification are drawn with probability |c_j|/‖μ‖;
    repeated draws of the same atom are merged so the coupling sum stays a.
    """
    n = _check_n(n)
    if a == 0:
        raise ValueError("total coupling a must be nonzero")
    rng = np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))
    u = rng.random(n)
    if isinstance(spec, CircleMeasure):
        theta = 2.0 * np.pi * u
        sites = spec.radius * np.column_stack([np.cos(theta), np.sin(theta)])
        dim = 2
    elif isinstance(spec, CurveMeasure):
        s = _inverse_cdf_sampler(spec.density, 0.0, spec.length)(u)
        sites = np.asarray(spec.path(s), dtype=float).reshape(n, spec.dim)
        dim = spec.dim
    elif isinstance(spec, IntervalDensity):
        sites = _inverse_cdf_sampler(spec.density, spec.a, spec.b)(u)[:, None]
        dim = 1
    elif isinstance(spec, ExplicitMeasure):
        weights = np.abs(spec.measure.couplings)
        idx = np.searchsorted(np.cumsum(weights) / weights.sum(), u, side="right")
        idx = np.minimum(idx, spec.measure.n - 1)
        sites = spec.measure.sites[idx]
        dim = spec.measure.dim
    else:
        raise TypeError(f"unknown measure specification {type(spec).__name__}")
    couplings = np.full(n, a / n)
    sites, couplings = _merge_coincident(sites, couplings, SEP_TOL)
    meta = {"spec": spec.echo(), "n": n, "a": a, "generator": RNG_NAME, "seed": int(seed)}
    return PointMeasure(dim, sites, couplings, metadata=meta)


def weak_distance(mu1: PointMeasure, mu2: PointMeasure, p_grid) -> float:
    """max_p |μ̂₁(p) - μ̂₂(p)| over a grid of frequency vectors."""
    if mu1.dim != mu2.dim:
        raise ValueError(f"dimension mismatch: {mu1.dim} vs {mu2.dim}")
    p = np.atleast_2d(np.asarray(p_grid, dtype=float))
    if p.size == 0:
        raise ValueError("p_grid must be nonempty")
    return float(np.max(np.abs(mu1.fourier(p) - mu2.fourier(p))))


def curve_mass(spec: CurveMeasure) -> float:
    """∫ density ds along the curve by adaptive quadrature."""
    value, _ = integrate.quad(lambda s: float(spec.density(np.asarray(s))), 0.0, spec.length)
    return value
