"""Negative spectrum of -Δ + ε²Δ² + μ for a finite point measure μ.

-α is an eigenvalue exactly when the N×N matrix

    M(α)_jk = δ_jk / c_k + g_{ε,α}(|x_j - x_k|)

is singular, and the eigenfunctions are Σ_k h_k g_{ε,α}(· - x_k) with h in
its kernel.  Off the diagonal M(α) = diag(1/c) + G(α) where G(α) is a Gram
matrix of a positive symbol that decreases in α, so every sorted eigenvalue
of M(α) is strictly decreasing in α.  Roots are located per sorted branch on
a logarithmic α grid and refined with Brent's method; branches whose roots
coincide (symmetric configurations) are clustered into one eigenvalue with
multiplicity.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.spatial import distance

from measure_spectra.green import (
    CAP_MARGIN,
    KernelParams,
    alpha_cap,
    green_eval,
    green_gram,
)
from measure_spectra.measure import PointMeasure

__all__ = [
    "EigenRecord",
    "Eigenfunctions",
    "SchroedingerProblem",
    "SpectralConsistencyError",
    "SpectrumResult",
    "SolverOptions",
    "bs_matrix",
    "branch_eigenvalues",
    "circulant_row",
    "det_lambda",
    "eigenfunction",
    "find_spectrum",
    "kernel_matrix",
    "norm_bound",
    "search_window",
]

logger = logging.getLogger(__name__)

_SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


class SpectralConsistencyError(ArithmeticError):
    """A sampled branch violated monotonicity; the α grid is too coarse or the data is bad."""


@dataclass(frozen=True)
class SchroedingerProblem:
    measure: PointMeasure
    epsilon: float
    cap_margin: float = CAP_MARGIN

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def dim(self) -> int:
        return self.measure.dim

    @property
    def n(self) -> int:
        return self.measure.n

    @property
    def alpha_cap(self) -> float:
        return alpha_cap(self.epsilon, self.cap_margin)

    @cached_property
    def _condensed(self) -> np.ndarray:
        return self.measure.pairwise_distances()

    def params(self, alpha: float) -> KernelParams:
        if not 0 < alpha < self.alpha_cap * (1 + 1e-15):
            raise ValueError(
                f"alpha={alpha!r} outside (0, alpha_cap={self.alpha_cap:.6g}); "
                "the kernel needs 4*eps^2*alpha < 1"
            )
        return KernelParams(self.dim, self.epsilon, float(alpha))


# ---------------------------------------------------------------------------
# matrices


def kernel_matrix(problem: SchroedingerProblem, alpha: float) -> np.ndarray:
    """G(α)_jk = g_{ε,α}(|x_j - x_k|), exactly symmetric."""
    params = problem.params(alpha)
    diag = green_eval(params, 0.0)
    if problem.n == 1:
        return np.array([[diag]])
    g = distance.squareform(green_eval(params, problem._condensed), checks=False)
    np.fill_diagonal(g, diag)
    return g


def bs_matrix(problem: SchroedingerProblem, alpha: float) -> np.ndarray:
    """M(α) = diag(1/c_k) + G(α)."""
    m = kernel_matrix(problem, alpha)
    m[np.diag_indices_from(m)] += 1.0 / problem.measure.couplings
    return m


def branch_eigenvalues(problem: SchroedingerProblem, alpha: float) -> np.ndarray:
    """Eigenvalues of M(α) in nondecreasing order."""
    return np.linalg.eigvalsh(bs_matrix(problem, alpha))


def det_lambda(problem: SchroedingerProblem, alpha: float) -> float:
    """det(δ_jk + c_k g_{ε,α}(x_j - x_k)); vanishes exactly at eigenvalues -α."""
    a = kernel_matrix(problem, alpha) * problem.measure.couplings[None, :]
    a[np.diag_indices_from(a)] += 1.0
    return float(np.linalg.det(a))


# ---------------------------------------------------------------------------
# a priori window from the H² norm bound


def _bound_integral(dim: int, epsilon: float, alpha: float) -> float:
    eps2 = epsilon * epsilon
    area = _SPHERE_AREA[dim]

    def integrand(p):
        p2 = p * p
        return p ** (dim - 1) * ((1.0 + p2) / (eps2 * p2 * p2 + p2 + alpha)) ** 2

    # two scales: √α and 1/ε
    knots = sorted({0.0, math.sqrt(alpha), 1.0 / epsilon})
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        total += integrate.quad(integrand, lo, hi, epsrel=1e-10, limit=200)[0]
    total += integrate.quad(integrand, knots[-1], np.inf, epsrel=1e-10, limit=200)[0]
    return area * total


def norm_bound(problem: SchroedingerProblem, alpha: float) -> float:
    """‖μ‖ (∫ (1+p²)² / (ε²p⁴+p²+α)² dp)^{1/2}, an upper bound on the perturbation norm."""
    return problem.measure.total_variation * math.sqrt(
        _bound_integral(problem.dim, problem.epsilon, alpha)
    )


def search_window(problem: SchroedingerProblem, rel_tol: float = 1e-6) -> float:
    """Smallest α₀ (to ``rel_tol``) with norm_bound < 1 for all α >= α₀.

    No eigenvalue lies below -α₀.  The bound decreases in α, so α₀ is found by
    doubling then bisection.  If the bound is still >= 1 at the decomposition
    cap, the cap itself is returned; callers compare against
    ``problem.alpha_cap`` to detect the truncation.
    """
    cap = problem.alpha_cap
    lo = min(1.0, cap)
    if norm_bound(problem, lo) < 1.0:
        hi = lo
        lo = 0.0
        while hi > 1e-300 and norm_bound(problem, hi / 2.0) < 1.0:
            hi /= 2.0
        lo = hi / 2.0
    else:
        hi = lo
        while True:
            if hi >= cap:
                return cap
            lo, hi = hi, min(2.0 * hi, cap)
            if norm_bound(problem, hi) < 1.0:
                break
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if norm_bound(problem, mid) < 1.0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# results


@dataclass
class EigenRecord:
    """Eigenvalue -alpha_star of multiplicity m with kernel vectors (rows of ``kernel_basis``)."""

    alpha_star: float
    multiplicity: int
    kernel_basis: np.ndarray
    residual: float = 0.0
    branch_roots: list[float] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return -self.alpha_star

    def to_dict(self, include_basis: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {
            "alpha_star": self.alpha_star,
            "energy": self.energy,
            "multiplicity": self.multiplicity,
            "residual": self.residual,
        }
        if include_basis:
            out["kernel_basis"] = self.kernel_basis.tolist()
        return out


@dataclass
class SpectrumResult:
    eigenvalues: list[EigenRecord]
    truncated: bool
    search_window: tuple[float, float]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def energies(self) -> list[float]:
        """Energies sorted ascending, each repeated by its multiplicity."""
        out: list[float] = []
        for rec in sorted(self.eigenvalues, key=lambda r: -r.alpha_star):
            out.extend([rec.energy] * rec.multiplicity)
        return out

    @property
    def total_multiplicity(self) -> int:
        return sum(rec.multiplicity for rec in self.eigenvalues)

    def to_dict(self, include_basis: bool = True) -> dict[str, Any]:
        return {
            "eigenvalues": [rec.to_dict(include_basis) for rec in self.eigenvalues],
            "truncated": self.truncated,
            "search_window": list(self.search_window),
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class SolverOptions:
    grid_per_decade: int = 64
    tol_root: float = 1e-10
    tol_cluster: float = 1e-6
    alpha_min: float = 1e-8
    tol_residual: float = 1e-8
    method: str = "auto"
    workers: int = 1

    def __post_init__(self):
        if self.grid_per_decade < 2:
            raise ValueError("grid_per_decade must be at least 2")
        if not (self.tol_root > 0 and self.tol_cluster >= 0 and self.alpha_min > 0):
            raise ValueError("tolerances and alpha_min must be positive")
        if self.method not in ("auto", "dense", "circulant"):
            raise ValueError(f"unknown method {self.method!r}")


# ---------------------------------------------------------------------------
# branch families


def circulant_row(problem: SchroedingerProblem, rtol: float = 1e-12) -> Optional[np.ndarray]:
    """First-row distances if M(α) is circulant for every α, else None.

    Requires equal couplings and |x_j - x_k| depending only on (k - j) mod N.
    """
    mu = problem.measure
    n = mu.n
    if n < 3 or not np.all(mu.couplings == mu.couplings[0]):
        return None
    dist = mu.distance_matrix()
    row = dist[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    scale = max(float(row.max()), 1e-300)
    if np.max(np.abs(dist - row[idx])) > rtol * scale:
        return None
    return row


@dataclass
class _Branches:
    """Monotone family of branch functions α -> values (one per branch)."""

    values: Callable[[float], np.ndarray]
    multiplicities: np.ndarray
    kind: str


def _dense_branches(problem: SchroedingerProblem) -> _Branches:
    return _Branches(
        values=lambda a: branch_eigenvalues(problem, a),
        multiplicities=np.ones(problem.n, dtype=int),
        kind="dense",
    )


def _circulant_branches(problem: SchroedingerProblem, row: np.ndarray) -> _Branches:
    n = problem.n
    inv_c = 1.0 / problem.measure.couplings[0]
    modes = np.arange(n // 2 + 1)
    mult = np.where((modes == 0) | (2 * modes == n), 1, 2)

    def values(alpha: float) -> np.ndarray:
        params = problem.params(alpha)
        first = np.empty(n)
        first[0] = green_eval(params, 0.0)
        first[1:] = green_eval(params, row[1:])
        # symmetric first row: the DFT is real
        return inv_c + np.fft.rfft(first).real

    return _Branches(values=values, multiplicities=mult, kind="circulant")


def _circulant_vectors(n: int, mode: int) -> list[np.ndarray]:
    j = np.arange(n)
    phase = 2.0 * np.pi * mode * j / n
    vecs = [np.cos(phase)]
    if 0 < mode and 2 * mode != n:
        vecs.append(np.sin(phase))
    return [v / np.linalg.norm(v) for v in vecs]


# ---------------------------------------------------------------------------
# root finding


def _alpha_grid(lo: float, hi: float, per_decade: int) -> np.ndarray:
    decades = math.log10(hi / lo)
    count = max(int(math.ceil(decades * per_decade)) + 1, 2)
    grid = np.geomspace(lo, hi, count)
    grid[-1] = hi
    return grid


def _refine(branches: _Branches, index: int, lo: float, hi: float, tol_root: float) -> float:
    rtol = max(tol_root * 1e-2, 4.0 * np.finfo(float).eps)

    def f(alpha):
        return branches.values(alpha)[index]

    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)


def _map(func, items, workers: int):
    if workers == 1 or len(items) < 2:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers if workers > 0 else None) as pool:
        return list(pool.map(func, items))


def find_spectrum(
    problem: SchroedingerProblem, opts: Optional[SolverOptions] = None, **kwargs
) -> SpectrumResult:
    """All eigenvalues -α* with α* in [alpha_min, min(α₀, α_cap)].

    ``truncated`` is set when eigenvalues provably exist beyond the searched
    window: every branch tends to the sorted 1/c_k as α -> ∞, so the number
    of missed roots is #{c_k < 0} minus the number of negative branches at the
    top of the window.
    """
    if opts is None:
        opts = SolverOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either opts or keyword options, not both")

    row = circulant_row(problem) if opts.method in ("auto", "circulant") else None
    if opts.method == "circulant" and row is None:
        raise ValueError("measure is not circulant; use method='dense'")
    branches = _circulant_branches(problem, row) if row is not None else _dense_branches(problem)

    cap = problem.alpha_cap
    alpha0 = search_window(problem)
    window_capped = alpha0 >= cap
    top = min(alpha0, cap)
    bottom = opts.alpha_min
    if bottom >= top:
        raise ValueError(f"alpha_min={bottom} is not below the window top {top}")
    grid = _alpha_grid(bottom, top, opts.grid_per_decade)

    samples = np.array(_map(branches.values, list(grid), opts.workers))
    scale = max(float(np.max(np.abs(samples))), 1.0)
    slack = 100.0 * np.finfo(float).eps * problem.n * scale
    rises = np.diff(samples, axis=0)
    if np.any(rises > slack):
        k, i = np.unravel_index(np.argmax(rises), rises.shape)
        raise SpectralConsistencyError(
            f"branch {i} increases between alpha={grid[k]:.6g} and {grid[k + 1]:.6g} "
            f"by {rises[k, i]:.3g}; the alpha grid is too coarse or the kernel is inaccurate"
        )

    first, last = samples[0], samples[-1]
    mult = branches.multiplicities
    unresolved_below = int(np.sum(mult[first <= 0]))
    neg_at_top = int(np.sum(mult[last < 0]))
    neg_limit = int(np.sum(problem.measure.couplings < 0))
    missing_above = max(neg_limit - neg_at_top, 0)
    truncated = missing_above > 0

    candidates = np.nonzero((first > 0) & (last <= 0))[0]
    brackets = []
    for i in candidates:
        k = int(np.argmax(samples[:, i] <= 0))
        brackets.append((int(i), float(grid[k - 1]), float(grid[k])))

    def solve(br):
        i, lo, hi = br
        if branches.values(hi)[i] == 0.0:
            return hi
        return _refine(branches, i, lo, hi, opts.tol_root)

    roots = _map(solve, brackets, opts.workers)
    found = sorted(zip(roots, (b[0] for b in brackets)))

    clusters: list[list[tuple[float, int]]] = []
    for root, i in found:
        if clusters and root - clusters[-1][-1][0] <= opts.tol_cluster * root:
            clusters[-1].append((root, i))
        else:
            clusters.append([(root, i)])

    records = []
    for cluster in clusters:
        alpha_star = float(np.mean([r for r, _ in cluster]))
        multiplicity = int(sum(mult[i] for _, i in cluster))
        if branches.kind == "circulant":
            basis = np.array([v for _, i in cluster for v in _circulant_vectors(problem.n, i)])
        else:
            w, v = np.linalg.eigh(bs_matrix(problem, alpha_star))
            pick = np.argsort(np.abs(w))[:multiplicity]
            basis = v[:, np.sort(pick)].T
        m_star = bs_matrix(problem, alpha_star)
        residual = float(max(np.linalg.norm(m_star @ h) / np.linalg.norm(h) for h in basis))
        if residual > opts.tol_residual:
            logger.warning(
                "kernel residual %.3g exceeds tol_residual at alpha*=%.12g", residual, alpha_star
            )
        records.append(
            EigenRecord(
                alpha_star=alpha_star,
                multiplicity=multiplicity,
                kernel_basis=basis,
                residual=residual,
                branch_roots=[r for r, _ in cluster],
            )
        )
    records.sort(key=lambda r: -r.alpha_star)

    metadata = {
        "method": branches.kind,
        "epsilon": problem.epsilon,
        "dim": problem.dim,
        "n_sites": problem.n,
        "alpha0_norm_bound": alpha0,
        "alpha_cap": cap,
        "window_capped": window_capped,
        "grid_points": int(grid.size),
        "grid_per_decade": opts.grid_per_decade,
        "tol_root": opts.tol_root,
        "tol_cluster": opts.tol_cluster,
        "tol_residual": opts.tol_residual,
        "unresolved_below": unresolved_below,
        "missing_above": missing_above,
    }
    return SpectrumResult(
        eigenvalues=records,
        truncated=truncated,
        search_window=(float(bottom), float(top)),
        metadata=metadata,
    )


# ---------------------------------------------------------------------------
# eigenfunctions


@dataclass
class Eigenfunctions:
    """Values of the normalised eigenfunctions, one row per kernel vector."""

    values: np.ndarray
    coefficients: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)


def _as_points(points, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if dim == 1 and pts.ndim == 1:
        pts = pts[:, None]
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ValueError(f"evaluation points must have dimension {dim}, got {pts.shape[1]}")
    return pts


def _superpose(problem, alpha, coeffs, points):
    params = problem.params(alpha)
    r = distance.cdist(points, problem.measure.sites)
    return coeffs @ np.asarray(green_eval(params, r)).T


def eigenfunction(
    problem: SchroedingerProblem,
    entry: EigenRecord,
    eval_points,
    quad_points=None,
    quad_weights=None,
) -> Eigenfunctions:
    """f(x) = Σ_k h_k g_{ε,α*}(|x - x_k|) for each kernel vector h.

    With a quadrature rule (``quad_points``, ``quad_weights``) each f is scaled
    to unit discrete L² norm on it.  Without one the exact norm hᵀ H h is used,
    H_jk = (g * g)(|x_j - x_k|).
    """
    points = _as_points(eval_points, problem.dim)
    coeffs = np.atleast_2d(entry.kernel_basis)
    if coeffs.shape[1] != problem.n:
        raise ValueError("kernel vectors do not match the number of sites")
    if quad_points is not None:
        if quad_weights is None:
            raise ValueError("quad_weights required with quad_points")
        qp = _as_points(quad_points, problem.dim)
        qw = np.asarray(quad_weights, dtype=float)
        fq = _superpose(problem, entry.alpha_star, coeffs, qp)
        norms = np.sqrt(np.abs(fq**2 @ qw))
        method = "quadrature"
    else:
        params = problem.params(entry.alpha_star)
        if problem.n == 1:
            gram = np.array([[green_gram(params, 0.0)]])
        else:
            gram = distance.squareform(green_gram(params, problem._condensed), checks=False)
            np.fill_diagonal(gram, green_gram(params, 0.0))
        norms = np.sqrt(np.einsum("ij,jk,ik->i", coeffs, gram, coeffs))
        method = "exact_gram"
    scaled = coeffs / norms[:, None]
    values = _superpose(problem, entry.alpha_star, scaled, points)
    return Eigenfunctions(
        values=values,
        coefficients=scaled,
        metadata={"normalization": method, "raw_norms": norms.tolist()},
    )
