"""Modified Bessel functions I_l and K_l of integer order for real positive argument.

Small arguments use the ascending series, large arguments Steed's continued
fraction for K_0/K_1, higher K orders come from the (stable) upward recurrence
and I_l from its all-positive power series with running rescaling.  Every
function accepts scalars or numpy arrays for ``z``; the order is a scalar.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "MAX_ORDER",
    "BesselRangeError",
    "bessel_I",
    "bessel_Ie",
    "bessel_K",
    "bessel_Ke",
    "ik_product",
]

MAX_ORDER = 64

_EULER_GAMMA = 0.57721566490153286061
_EPS = np.finfo(float).eps
_SERIES_SWITCH = 2.0
# beyond this the I series needs too many terms; the Hankel expansion is used instead
_ASYMPTOTIC_SWITCH = 1.0e4
_RESCALE = 1.0e200
_LOG_RESCALE = math.log(_RESCALE)
_TINY = np.finfo(float).tiny


class BesselRangeError(ArithmeticError):
    """The unscaled value under- or overflows double precision; use the scaled variant."""


def _check_order(l) -> int:
    if isinstance(l, (bool, np.bool_)) or int(l) != l:
        raise ValueError(f"Bessel order must be a nonnegative integer, got {l!r}")
    l = int(l)
    if l < 0:
        raise ValueError(f"Bessel order must be nonnegative, got {l}")
    if l > MAX_ORDER:
        raise ValueError(f"Bessel order {l} exceeds the cap MAX_ORDER={MAX_ORDER}")
    return l


def _as_array(z, *, strictly_positive: bool) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(np.isnan(z)):
        raise ValueError("Bessel argument is NaN")
    if strictly_positive and np.any(z <= 0):
        raise ValueError("Bessel K requires z > 0")
    if not strictly_positive and np.any(z < 0):
        raise ValueError("Bessel I requires z >= 0")
    return z


def _wrap(result: np.ndarray, z_in):
    if np.ndim(z_in) == 0:
        return float(result)
    return result


# ---------------------------------------------------------------------------
# K_0, K_1


def _k01_series(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled K_0 and K_1 from the ascending series, valid for 0 < z <= 2."""
    q = 0.25 * z * z
    log_half = np.log(0.5 * z)
    i0 = np.ones_like(z)
    i1 = np.full_like(z, 0.5)
    term0 = np.ones_like(z)  # q^k / (k!)^2
    f0 = np.zeros_like(z)
    harmonic = 0.0
    # K_1 tail: (z/4) sum_k [psi(k+1) + psi(k+2)] q^k / (k!(k+1)!)
    psi_k1 = -_EULER_GAMMA  # psi(1)
    psi_k2 = 1.0 - _EULER_GAMMA  # psi(2)
    t1 = np.ones_like(z)  # q^k / (k!(k+1)!)
    f1 = (psi_k1 + psi_k2) * t1
    for k in range(1, 30):
        term0 = term0 * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term0
        f0 = f0 + harmonic * term0
        t1 = t1 * q / (k * (k + 1))
        psi_k1 += 1.0 / k
        psi_k2 += 1.0 / (k + 1)
        f1 = f1 + (psi_k1 + psi_k2) * t1
        i1 = i1 + 0.5 * t1
    i1 = i1 * z
    k0 = -(log_half + _EULER_GAMMA) * i0 + f0
    k1 = 1.0 / z + log_half * i1 - 0.25 * z * f1
    return k0, k1


def _k01_scaled_cf(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """e^z K_0 and e^z K_1 by Steed's continued fraction, valid for z >= 2."""
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(z)
    q2 = np.ones_like(z)
    a1 = 0.25
    q = np.full_like(z, a1)
    c = np.full_like(z, a1)
    a = -a1
    s = 1.0 + q * delh
    active = np.ones(z.shape, dtype=bool)
    for i in range(1, 10000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + np.where(active, delh, 0.0)
        dels = q * delh
        s = s + np.where(active, dels, 0.0)
        active &= np.abs(dels / s) >= _EPS
        if not active.any():
            break
    else:  # pragma: no cover - convergence is fast for z >= 2
        raise ArithmeticError("continued fraction for K failed to converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * z)) / s
    k1 = k0 * (z + 0.5 - h) / z
    return k0, k1


def _k01_scaled(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k0 = np.empty_like(z)
    k1 = np.empty_like(z)
    small = z <= _SERIES_SWITCH
    if small.any():
        zs = z[small]
        a, b = _k01_series(zs)
        scale = np.exp(zs)
        k0[small] = a * scale
        k1[small] = b * scale
    if (~small).any():
        a, b = _k01_scaled_cf(z[~small])
        k0[~small] = a
        k1[~small] = b
    return k0, k1


def _k_scaled(l: int, z: np.ndarray) -> np.ndarray:
    k0, k1 = _k01_scaled(z)
    if l == 0:
        return k0
    prev, cur = k0, k1
    with np.errstate(over="ignore"):
        for n in range(1, l):
            prev, cur = cur, prev + (2.0 * n / z) * cur
    return cur


def _k_ratio_product(l: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (e^z K_0, prod_{k=1..l} (K_k/K_{k-1}) * z/(2k)).

    The product equals e^z K_l(z) (z/2)^l / l! / (e^z K_0), a number of moderate
    size even where K_l itself overflows.
    """
    k0, k1 = _k01_scaled(z)
    prod = np.ones_like(z)
    if l == 0:
        return k0, prod
    ratio = k1 / k0
    for n in range(1, l + 1):
        if n > 1:
            ratio = 1.0 / ratio + 2.0 * (n - 1) / z
        prod = prod * ratio * z / (2.0 * n)
    return k0, prod


# ---------------------------------------------------------------------------
# I_l


def _i_series_normalized(l: int, z: np.ndarray) -> np.ndarray:
    """e^{-z} * sum_k (z^2/4)^k l! / (k! (k+l)!), i.e. e^{-z} I_l(z) l! / (z/2)^l.

    All terms are positive.  Terms are rescaled whenever they exceed 1e200 so
    that the exponential factor can be applied at the end without overflow.
    """
    q = 0.25 * z * z
    total = np.ones_like(z)
    term = np.ones_like(z)
    scale_count = np.zeros(z.shape)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    while active.any():
        k += 1
        term = np.where(active, term * q / (k * (k + l)), term)
        total = np.where(active, total + term, total)
        big = total > _RESCALE
        if big.any():
            total = np.where(big, total / _RESCALE, total)
            term = np.where(big, term / _RESCALE, term)
            scale_count = scale_count + big
        # the series terms start decreasing once k(k+l) > q
        active &= ~((term <= _EPS * 0.25 * total) & (k * (k + l) > q))
    log_factor = scale_count * _LOG_RESCALE - z
    return total * np.exp(log_factor)


def _i_scaled_asymptotic(l: int, z: np.ndarray) -> np.ndarray:
    mu = 4.0 * l * l
    total = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 60):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        total = total + term
        if np.all(np.abs(term) < _EPS * np.abs(total)):
            break
    return total / np.sqrt(2.0 * np.pi * z)


def _i_scaled(l: int, z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    large = z > _ASYMPTOTIC_SWITCH
    if large.any():
        out[large] = _i_scaled_asymptotic(l, z[large])
    mid = (~large) & (z > 0)
    if mid.any():
        zm = z[mid]
        norm = _i_series_normalized(l, zm)
        if l == 0:
            out[mid] = norm
        else:
            with np.errstate(under="ignore"):
                log_pref = l * np.log(0.5 * zm) - math.lgamma(l + 1)
                out[mid] = norm * np.exp(log_pref)
    zero = z == 0
    out[zero] = 1.0 if l == 0 else 0.0
    return out


# ---------------------------------------------------------------------------
# public API


def bessel_Ke(l, z):
    """Exponentially scaled K: ``exp(z) * K_l(z)``.

    Raises ``BesselRangeError`` if the value overflows (large order, tiny z).
    """
    l = _check_order(l)
    za = _as_array(z, strictly_positive=True)
    out = _k_scaled(l, np.atleast_1d(za)).reshape(za.shape)
    if not np.all(np.isfinite(out)):
        raise BesselRangeError(f"K_{l}(z) overflows double precision for some z")
    return _wrap(out, z)


def bessel_K(l, z):
    """Modified Bessel function of the second kind ``K_l(z)`` for ``z > 0``.

    Raises ``BesselRangeError`` where the unscaled value under- or overflows;
    use :func:`bessel_Ke` there.
    """
    l = _check_order(l)
    za = _as_array(z, strictly_positive=True)
    flat = np.atleast_1d(za)
    scaled = _k_scaled(l, flat)
    with np.errstate(under="ignore", over="ignore"):
        out = scaled * np.exp(-flat)
    if not np.all(np.isfinite(out)):
        raise BesselRangeError(f"K_{l}(z) overflows for some z; use bessel_Ke")
    if np.any(out < _TINY):
        raise BesselRangeError(f"K_{l}(z) underflows for some z; use bessel_Ke")
    return _wrap(out.reshape(za.shape), z)


def bessel_Ie(l, z):
    """Exponentially scaled I: ``exp(-z) * I_l(z)`` for ``z >= 0``."""
    l = _check_order(l)
    za = _as_array(z, strictly_positive=False)
    out = _i_scaled(l, np.atleast_1d(za)).reshape(za.shape)
    return _wrap(out, z)


def bessel_I(l, z):
    """Modified Bessel function of the first kind ``I_l(z)`` for ``z >= 0``.

    Raises ``BesselRangeError`` when the value overflows (z beyond about 713);
    use :func:`bessel_Ie` there.
    """
    l = _check_order(l)
    za = _as_array(z, strictly_positive=False)
    flat = np.atleast_1d(za)
    scaled = _i_scaled(l, flat)
    with np.errstate(over="ignore", under="ignore"):
        out = scaled * np.exp(flat)
    if not np.all(np.isfinite(out)):
        raise BesselRangeError(f"I_{l}(z) overflows for some z; use bessel_Ie")
    return _wrap(out.reshape(za.shape), z)


def ik_product(l, z):
    """``I_l(z) * K_l(z)`` for ``z > 0``, free of intermediate over/underflow.

    Strictly decreasing in z; tends to ``1/(2l)`` as z -> 0 for l >= 1 and
    behaves like ``1/(2z)`` for large z.
    """
    l = _check_order(l)
    za = _as_array(z, strictly_positive=True)
    flat = np.atleast_1d(za)
    out = np.empty_like(flat)
    large = flat > _ASYMPTOTIC_SWITCH
    if large.any():
        zl = flat[large]
        out[large] = _i_scaled_asymptotic(l, zl) * _k_scaled(l, zl)
    rest = ~large
    if rest.any():
        zr = flat[rest]
        k0_scaled, ratio_prod = _k_ratio_product(l, zr)
        out[rest] = _i_series_normalized(l, zr) * k0_scaled * ratio_prod
    return _wrap(out.reshape(za.shape), z)
