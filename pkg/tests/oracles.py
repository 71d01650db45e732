"""Independent reference computations used by the test-suite.

Nothing here calls into the kernel or Bessel code under test: the Green
kernel comes from adaptive quadrature of its Fourier inversion, the Bessel
functions from an mpmath power series (I) and quadrature of the cosh
integral (K), and the single-point root from bisection at 50 digits.
"""

from __future__ import annotations

import math
import warnings

import mpmath as mp
import numpy as np
import sympy as sy
from scipy.integrate import IntegrationWarning, quad

# ---------------------------------------------------------------------------
# Green kernel by radial Fourier inversion
#
#   d = 1:  g(r) = (1/π)      ∫_0^∞ cos(pr) f(p) dp
#   d = 3:  g(r) = 1/(2π² r)  ∫_0^∞ sin(pr) p f(p) dp,     f = 1/(ε²p⁴ + p² + α)
#
# The oscillatory integral is split at P = 200/min(ε, r): QAWO on [0, P] and four
# rounds of integration by parts for the tail, whose remainder is O(P^-9).

_p, _e, _a = sy.symbols("p e a", positive=True)
_F = 1 / (_e**2 * _p**4 + _p**2 + _a)
_DERIVS = {
    1: [sy.lambdify((_p, _e, _a), sy.diff(_F, _p, k), "math") for k in range(4)],
    3: [sy.lambdify((_p, _e, _a), sy.diff(_p * _F, _p, k), "math") for k in range(4)],
}


def _tail(fs, P, r, kind):
    s, c = np.sin(P * r), np.cos(P * r)
    if kind == "cos":
        return -fs[0] * s / r - fs[1] * c / r**2 + fs[2] * s / r**3 + fs[3] * c / r**4
    return fs[0] * c / r - fs[1] * s / r**2 - fs[2] * c / r**3 + fs[3] * s / r**4


def kernel_quadrature(dim: int, eps: float, alpha: float, r: float) -> float:
    if dim not in (1, 3):
        raise ValueError("quadrature oracle covers d = 1 and d = 3")
    ds = _DERIVS[dim]

    def f(q):
        return ds[0](q, eps, alpha)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if r == 0:
            if dim == 1:
                return quad(f, 0, np.inf, epsabs=0, epsrel=1e-13, limit=1000)[0] / np.pi
            return quad(lambda q: q * f(q), 0, np.inf, epsabs=0, epsrel=1e-13, limit=1000)[0] / (
                2 * np.pi**2
            )
        P = 200.0 / min(eps, r)
        kind = "cos" if dim == 1 else "sin"
        head = quad(f, 0, P, weight=kind, wvar=r, epsabs=0, epsrel=1e-13, limit=20000)[0]
    total = head + _tail([d(P, eps, alpha) for d in ds], P, r, kind)
    return total / np.pi if dim == 1 else total / (2 * np.pi**2 * r)


# ---------------------------------------------------------------------------
# modified Bessel functions


def mp_bessel_I(l: int, z: float, dps: int = 40) -> float:
    """Σ_k (z/2)^{2k+l} / (k! (k+l)!) summed in extended precision."""
    with mp.workdps(dps):
        z = mp.mpf(z)
        return float(mp.nsum(lambda k: (z / 2) ** (2 * k + l) / (mp.factorial(k) * mp.factorial(k + l)), [0, mp.inf]))


def quad_bessel_K(l: int, z: float) -> float:
    """∫_0^∞ exp(-z cosh t) cosh(l t) dt by adaptive quadrature.

    The integrand is divided by its peak value exp(-z cosh t* + l t*) with
    t* = asinh(l/z), which keeps it O(1) when K_l(z) is huge. The cut-off
    drops a tail below e^-120 of the peak.
    """
    t_end = math.acosh(1 + (120 + 50 * l) / z) + 1
    t_peak = math.asinh(l / z)
    log_peak = -z * math.cosh(t_peak) + l * t_peak

    def f(t):
        return math.exp(-z * math.cosh(t) + l * t - log_peak) * 0.5 * (1 + math.exp(-2 * l * t))

    points = [t_peak] if 0 < t_peak < t_end else None
    val = quad(f, 0, t_end, points=points, epsabs=0, epsrel=1e-13, limit=500)[0]
    return val * math.exp(log_peak)


# ---------------------------------------------------------------------------
# single point in d = 1


def mp_delta_root(coupling: float, eps: float, dps: int = 50) -> float:
    """α > 0 with 1/c + g_{ε,α}(0) = 0, by bisection on the closed form at high precision.

    g(0) = (1/π)∫ dp/(ε²p⁴ + p² + α) = (1/(2s))(1/√a - 1/√b) with
    s = √(1 - 4ε²α), a = (1 - s)/(2ε²), b = (1 + s)/(2ε²).
    """
    with mp.workdps(dps):
        c = mp.mpf(coupling)
        e2 = mp.mpf(eps) ** 2

        def h(al):
            s = mp.sqrt(1 - 4 * e2 * al)
            a = (1 - s) / (2 * e2)
            b = (1 + s) / (2 * e2)
            return 1 / c + (1 / mp.sqrt(a) - 1 / mp.sqrt(b)) / (2 * s)

        lo, hi = mp.mpf("1e-30"), (1 - mp.mpf("1e-12")) / (4 * e2)
        if h(lo) * h(hi) > 0:
            raise ValueError("no sign change")
        for _ in range(300):
            mid = (lo + hi) / 2
            if h(lo) * h(mid) <= 0:
                hi = mid
            else:
                lo = mid
        return float((lo + hi) / 2)


# ---------------------------------------------------------------------------
# randomized point problems


def random_problems(count: int = 100, seed: int = 20261017):
    """(dim, eps, sites, couplings) tuples: N ≤ 20, mixed-sign couplings, separated sites."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        dim = int(rng.integers(1, 4))
        n = int(rng.integers(1, 21))
        eps = float(10 ** rng.uniform(-2.5, -1))
        sites = rng.uniform(-2.0, 2.0, size=(n, dim))
        if n > 1:
            diff = sites[:, None, :] - sites[None, :, :]
            dist = np.sqrt((diff**2).sum(-1)) + np.eye(n)
            if dist.min() < 0.05:
                continue
        signs = rng.choice([-1.0, 1.0], size=n, p=[0.7, 0.3])
        couplings = signs * 10 ** rng.uniform(-0.5, 0.5, size=n)
        out.append((dim, eps, sites, couplings))
    return out
