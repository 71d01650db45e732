"""Green kernels of -Δ + ε²Δ² + α in one to three dimensions.

For ε > 0 and 4ε²α < 1 the symbol 1/(ε²p⁴ + p² + α) splits into two
Yukawa-type symbols,

    1/(ε²p⁴ + p² + α) = c [1/(p² + a) - 1/(p² + b)],

with -a, -b the roots of ε²x² + x + α.  The kernel is therefore a weighted
difference of two free-Laplacian kernels, finite at the origin for d <= 3.
All evaluators are vectorised over ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from measure_spectra.specfun import bessel_Ke

__all__ = [
    "CAP_MARGIN",
    "Decomposition",
    "KernelParams",
    "RegimeError",
    "alpha_cap",
    "decompose",
    "free_green",
    "green_eval",
    "green_gram",
    "green_hat",
]

CAP_MARGIN = 1e-6
_EULER_GAMMA = 0.57721566490153286061
# below this r the d=3 kernel uses its Taylor expansion
_D3_TAYLOR_R = 1e-12


class RegimeError(ValueError):
    """Parameters outside the real-root regime 4ε²α < 1 of the decomposition."""


@dataclass(frozen=True)
class KernelParams:
    dim: int
    epsilon: float
    alpha: float

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be nonnegative, got {self.epsilon}")

    @property
    def discriminant(self) -> float:
        """1 - 4ε²α; the decomposition needs it positive."""
        return 1.0 - 4.0 * self.epsilon**2 * self.alpha


@dataclass(frozen=True)
class Decomposition:
    """Coefficients (c, a, b) with ĝ(p) = c/(p² + a) - c/(p² + b).

    ``root_gap`` stores b - a computed without cancellation.
    """

    c_eps: float
    alpha_eps: float
    beta_eps: float
    root_gap: float


def alpha_cap(epsilon: float, margin: float = CAP_MARGIN) -> float:
    """Largest α the decomposition is used for: (1 - margin)/(4ε²)."""
    if not epsilon > 0:
        raise ValueError("alpha_cap needs epsilon > 0")
    return (1.0 - margin) / (4.0 * epsilon**2)


def decompose(params: KernelParams) -> Decomposition:
    if params.epsilon == 0:
        raise ValueError("epsilon = 0 has no decomposition; use free_green directly")
    disc = params.discriminant
    if not disc > 0:
        raise RegimeError(
            f"4*eps^2*alpha = {1.0 - disc:.6g} >= 1: the roots are complex, "
            "the kernel decomposition requires 4*eps^2*alpha < 1"
        )
    s = math.sqrt(disc)
    eps2 = params.epsilon**2
    a = 2.0 * params.alpha / (1.0 + s)
    b = (1.0 + s) / (2.0 * eps2)
    return Decomposition(c_eps=1.0 / s, alpha_eps=a, beta_eps=b, root_gap=s / eps2)


def green_hat(params: KernelParams, p):
    """Fourier symbol 1/(ε²p⁴ + p² + α)."""
    p = np.asarray(p, dtype=float)
    p2 = p * p
    out = 1.0 / (params.epsilon**2 * p2 * p2 + p2 + params.alpha)
    return float(out) if out.ndim == 0 else out


def _k0(z: np.ndarray) -> np.ndarray:
    with np.errstate(under="ignore"):
        return bessel_Ke(0, z) * np.exp(-z)


def _k1(z: np.ndarray) -> np.ndarray:
    with np.errstate(under="ignore"):
        return bessel_Ke(1, z) * np.exp(-z)


def _free(dim: int, alpha: float, r: np.ndarray) -> np.ndarray:
    k = math.sqrt(alpha)
    if dim == 1:
        return np.exp(-k * r) / (2.0 * k)
    if dim == 2:
        return _k0(k * r) / (2.0 * np.pi)
    return np.exp(-k * r) / (4.0 * np.pi * r)


def free_green(dim: int, alpha: float, r):
    """Kernel of (-Δ + α)^{-1} as a function of |x - y| = r.

    d=1: e^{-√α r}/(2√α);  d=2: K₀(√α r)/(2π);  d=3: e^{-√α r}/(4π r).
    Raises ``ValueError`` at r = 0 for d = 2, 3 where the kernel is singular.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise ValueError("r must be nonnegative")
    if dim in (2, 3) and np.any(ra == 0):
        kind = "logarithmic" if dim == 2 else "Coulomb"
        raise ValueError(f"free Green function has a {kind} singularity at r = 0 in d={dim}")
    out = _free(dim, alpha, ra)
    return float(out) if out.ndim == 0 else out


def _diagonal(dim: int, epsilon: float, alpha: float, dec: Decomposition) -> float:
    sa = math.sqrt(dec.alpha_eps)
    sb = math.sqrt(dec.beta_eps)
    if dim == 1:
        # c (1/(2√a) - 1/(2√b)) rewritten with c(b - a) = 1/ε² and √(ab) = √α/ε
        return 1.0 / (2.0 * epsilon * math.sqrt(alpha) * (sa + sb))
    if dim == 2:
        return dec.c_eps * math.log1p(dec.root_gap / dec.alpha_eps) / (4.0 * np.pi)
    return 1.0 / (4.0 * np.pi * epsilon**2 * (sa + sb))


def _k0_difference_small(sa: float, sb: float, r: np.ndarray) -> np.ndarray:
    """K₀(√a r) - K₀(√b r) from the ascending series, for √b r <= 2.

    Differences of the two series are summed termwise (all of one sign), so
    nothing cancels catastrophically as r -> 0.
    """
    qa = 0.25 * (sa * r) ** 2
    qb = 0.25 * (sb * r) ** 2
    ta = np.ones_like(r)
    tb = np.ones_like(r)
    d_i0 = np.zeros_like(r)  # I₀(√b r) - I₀(√a r)
    d_f = np.zeros_like(r)  # F(√b r) - F(√a r), F the harmonic-weighted tail
    i0a = np.ones_like(r)
    harmonic = 0.0
    for k in range(1, 30):
        ta = ta * qa / (k * k)
        tb = tb * qb / (k * k)
        harmonic += 1.0 / k
        i0a = i0a + ta
        d_i0 = d_i0 + (tb - ta)
        d_f = d_f + harmonic * (tb - ta)
    log_ratio = math.log(sb / sa)
    log_half_b = np.log(0.5 * sb * r)
    # K₀(x) = -(ln(x/2) + γ) I₀(x) + F(x)
    return log_ratio * i0a + (log_half_b + _EULER_GAMMA) * d_i0 - d_f


def _green_offdiag(dim: int, dec: Decomposition, r: np.ndarray) -> np.ndarray:
    c = dec.c_eps
    sa = math.sqrt(dec.alpha_eps)
    sb = math.sqrt(dec.beta_eps)
    if dim == 1:
        return c * (np.exp(-sa * r) / (2.0 * sa) - np.exp(-sb * r) / (2.0 * sb))
    if dim == 2:
        out = np.empty_like(r)
        small = sb * r <= 2.0
        if small.any():
            out[small] = _k0_difference_small(sa, sb, r[small])
        if (~small).any():
            rl = r[~small]
            out[~small] = _k0(sa * rl) - _k0(sb * rl)
        return c * out / (2.0 * np.pi)
    gap = sb - sa
    out = np.empty_like(r)
    tiny = r < _D3_TAYLOR_R
    if tiny.any():
        rt = r[tiny]
        out[tiny] = gap - (sb**2 - sa**2) * rt / 2.0 + (sb**3 - sa**3) * rt**2 / 6.0
    if (~tiny).any():
        rl = r[~tiny]
        out[~tiny] = -np.exp(-sa * rl) * np.expm1(-gap * rl) / rl
    return c * out / (4.0 * np.pi)


def green_eval(params: KernelParams, r):
    """g_{ε,α}(r) for ε > 0, 4ε²α < 1 and r >= 0, including the finite value at r = 0."""
    dec = decompose(params)
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0) or np.any(np.isnan(ra)):
        raise ValueError("r must be nonnegative")
    flat = np.atleast_1d(ra).astype(float)
    out = np.empty_like(flat)
    zero = flat == 0
    if zero.any():
        out[zero] = _diagonal(params.dim, params.epsilon, params.alpha, dec)
    if (~zero).any():
        out[~zero] = _green_offdiag(params.dim, dec, flat[~zero])
    out = out.reshape(ra.shape)
    return float(out) if out.ndim == 0 else out


def _free_gram(dim: int, alpha: float, r: np.ndarray) -> np.ndarray:
    """Kernel with symbol 1/(p² + α)², i.e. -∂/∂α of the free kernel."""
    k = math.sqrt(alpha)
    if dim == 1:
        return np.exp(-k * r) * (1.0 + k * r) / (4.0 * alpha * k)
    if dim == 3:
        return np.exp(-k * r) / (8.0 * np.pi * k)
    out = np.empty_like(r)
    zero = r == 0
    out[zero] = 1.0 / (4.0 * np.pi * alpha)
    if (~zero).any():
        rp = r[~zero]
        out[~zero] = rp * _k1(k * rp) / (4.0 * np.pi * k)
    return out


def green_gram(params: KernelParams, r):
    """Kernel with symbol ĝ(p)², i.e. (g * g)(r) = -∂g/∂α.

    Gives exact L² inner products of translates of g: the squared norm of
    Σ h_k g(· - x_k) is hᵀ H h with H_jk = green_gram(|x_j - x_k|).
    """
    dec = decompose(params)
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise ValueError("r must be nonnegative")
    flat = np.atleast_1d(ra).astype(float)
    a, b, c = dec.alpha_eps, dec.beta_eps, dec.c_eps
    # ĝ² = c²[1/(p²+a)² + 1/(p²+b)²] - 2c/(b-a) * ĝ
    g = green_eval(params, flat)
    out = c * c * (_free_gram(params.dim, a, flat) + _free_gram(params.dim, b, flat))
    out = out - 2.0 * c * np.asarray(g) / dec.root_gap
    out = out.reshape(ra.shape)
    return float(out) if out.ndim == 0 else out
