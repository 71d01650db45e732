"""Exact bound states of -Δ - γ δ(|x| - R) in the plane.

Separating angular momentum l, the radial solution is A I_l(κr) inside and
B K_l(κr) outside the circle.  Continuity at R together with the derivative
jump u'(R+) - u'(R-) = -γ u(R) and the Wronskian I_l K_l' - I_l' K_l = -1/z
reduce the matching to

    γ R I_l(κR) K_l(κR) = 1.

I_l K_l decreases strictly from 1/(2l) (l >= 1) or +∞ (l = 0) to 0, so each
l has at most one bound state and l >= 1 binds iff γR > 2l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy import integrate, optimize

from measure_spectra.specfun import MAX_ORDER, bessel_Ie, bessel_Ke, ik_product

__all__ = [
    "CircleLevel",
    "CircleSpec",
    "CircleSpectrum",
    "circle_eigenvalue",
    "circle_spectrum",
    "matching_function",
    "radial_defect",
]

_Z_FLOOR = 1e-12


@dataclass(frozen=True)
class CircleSpec:
    radius: float
    gamma: float

    def __post_init__(self):
        if not (self.radius > 0 and self.gamma > 0):
            raise ValueError("circle oracle needs R > 0 and gamma > 0")


@dataclass(frozen=True)
class CircleLevel:
    l: int
    kappa: float

    @property
    def energy(self) -> float:
        return -self.kappa**2

    @property
    def multiplicity(self) -> int:
        return 1 if self.l == 0 else 2

    def to_dict(self) -> dict[str, Any]:
        return {
            "l": self.l,
            "kappa": self.kappa,
            "energy": self.energy,
            "multiplicity": self.multiplicity,
        }


@dataclass(frozen=True)
class CircleSpectrum:
    spec: CircleSpec
    levels: tuple[CircleLevel, ...]

    @property
    def energies(self) -> list[float]:
        """Energies ascending, repeated by multiplicity."""
        out: list[float] = []
        for level in self.levels:
            out.extend([level.energy] * level.multiplicity)
        return out

    @property
    def count(self) -> int:
        return sum(level.multiplicity for level in self.levels)


def _binds(l: int, spec: CircleSpec) -> bool:
    return l == 0 or spec.gamma * spec.radius > 2 * l


def circle_eigenvalue(l: int, spec: CircleSpec) -> Optional[float]:
    """κ > 0 with γR I_l(κR) K_l(κR) = 1, or None if the l-channel has no bound state."""
    if int(l) != l or l < 0:
        raise ValueError(f"angular momentum must be a nonnegative integer, got {l!r}")
    l = int(l)
    if not _binds(l, spec):
        return None
    strength = spec.gamma * spec.radius

    def f(z):
        return strength * ik_product(l, z) - 1.0

    lo = _Z_FLOOR
    while f(lo) <= 0:
        if l > 0 or lo < 1e-290:
            # l >= 1 just above threshold, or an l = 0 level below double range
            return None
        lo *= 1e-10
    hi = 1.0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
    z = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return z / spec.radius


def circle_spectrum(spec: CircleSpec) -> CircleSpectrum:
    """All bound states, deepest first; l >= 1 levels are doubly degenerate."""
    l_top = math.ceil(spec.gamma * spec.radius / 2.0) - 1
    if l_top > MAX_ORDER:
        raise OverflowError(
            f"gamma*R/2 = {spec.gamma * spec.radius / 2:.6g} needs Bessel orders above "
            f"MAX_ORDER={MAX_ORDER}; raise the order cap"
        )
    levels = []
    l = 0
    while True:
        kappa = circle_eigenvalue(l, spec)
        if kappa is None:
            break
        levels.append(CircleLevel(l, kappa))
        l += 1
    levels.sort(key=lambda lev: lev.energy)
    return CircleSpectrum(spec, tuple(levels))


def _radial_rhs(l: int, kappa: float):
    def rhs(r, y):
        u, du = y
        return [du, -du / r + (l * l / (r * r) + kappa * kappa) * u]

    return rhs


def radial_defect(l: int, spec: CircleSpec, kappa: float, rtol: float = 1e-12) -> float:
    """Relative mismatch of the derivative jump for a trial κ, found by ODE shooting.

    The radial equation -u'' - u'/r + (l²/r² + κ²)u = 0 is integrated outward
    from near the origin (regular solution) and inward from far outside
    (decaying solution), both normalised to u(R) = 1.  The return value is
    (u'(R+) - u'(R-) + γ) / (|u'(R+)| + |u'(R-)| + γ), zero exactly at a bound
    state.  Only power-law/exponential starting data are used, no Bessel
    values at R, so it checks the matching equation independently.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    R = spec.radius
    rhs = _radial_rhs(l, kappa)

    # regular solution near 0: u ~ r^l (1 + (κr)²/(4(l+1)))
    r0 = min(1e-3 * R, 1e-2 / kappa)
    x = kappa * r0
    u0 = r0**l * (1.0 + x * x / (4.0 * (l + 1)))
    du0 = (l * r0 ** (l - 1) if l > 0 else 0.0) * (1.0 + x * x / (4.0 * (l + 1))) + r0**l * (
        kappa * x / (2.0 * (l + 1))
    )
    inner = integrate.solve_ivp(
        rhs, (r0, R), [u0, du0], method="DOP853", rtol=rtol, atol=1e-300
    )
    # decaying solution far out: WKB start u ~ e^{-κr}/√r with the l-dependent correction
    r_far = R + 40.0 / kappa
    mu = 4.0 * l * l
    corr = 1.0 + (mu - 1.0) / (8.0 * kappa * r_far)
    dcorr = -(mu - 1.0) / (8.0 * kappa * r_far * r_far)
    u_far = corr
    du_far = corr * (-kappa - 0.5 / r_far) + dcorr
    outer = integrate.solve_ivp(
        rhs, (r_far, R), [u_far, du_far], method="DOP853", rtol=rtol, atol=1e-300
    )
    if not (inner.success and outer.success):
        raise ArithmeticError(f"radial integration failed: {inner.message} / {outer.message}")
    uin, duin = inner.y[:, -1]
    uout, duout = outer.y[:, -1]
    slope_in = duin / uin
    slope_out = duout / uout
    return (slope_out - slope_in + spec.gamma) / (abs(slope_out) + abs(slope_in) + spec.gamma)


def matching_function(l: int, spec: CircleSpec, kappa: float) -> float:
    """γR I_l(κR) K_l(κR) - 1 via the scaled Bessel functions (diagnostic)."""
    z = kappa * spec.radius
    return spec.gamma * spec.radius * bessel_Ie(l, z) * bessel_Ke(l, z) - 1.0
