"""Skew-shift orbits on the 2-torus and renormalized transfer-matrix products.

Torus points are held as Python ints in ``[0, 2**128)`` read as fractions
with denominator ``2**128``.  Addition mod 1 is then exact integer addition
masked to 128 bits, so orbit phases never drift no matter how long the orbit.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .validation import check_int, check_lambda, check_scalar

BITS = 128
ONE = 1 << BITS
MASK = ONE - 1
_LIMB = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi

# Renormalize once the largest entry leaves [2**-30, 2**30].
_LOW = 2.0 ** -30
_HIGH = 2.0 ** 30


def golden_ratio_frac() -> int:
    """floor(2**128 * (sqrt(5) - 1) / 2)."""
    return (isqrt(5 << (2 * BITS)) - ONE) // 2


OMEGA = golden_ratio_frac()


def frac_from_float(x: float) -> int:
    """Nearest 128-bit fraction to ``x mod 1`` (``x`` read exactly)."""
    return round(Fraction(x) * ONE) & MASK


def frac_to_float(v: int) -> float:
    # Keep the top 64 bits; the double can hold only 53 of them anyway.
    return (v >> 64) * 2.0 ** -64


def frac_distance_to_int(v: int) -> int:
    """Numerator of ||v||_T over 2**128."""
    v &= MASK
    return min(v, ONE - v)


def skew_orbit(x: int, y: int, n: int, omega: int = OMEGA):
    """T^n(x, y) by iterating (x, y) -> (x + y, y + omega)."""
    check_int(n, "n", min_val=0)
    x &= MASK
    y &= MASK
    for _ in range(n):
        x = (x + y) & MASK
        y = (y + omega) & MASK
    return x, y


def skew_orbit_closed(x: int, y: int, n: int, omega: int = OMEGA):
    """T^n(x, y) = (x + n y + n(n-1)/2 omega, y + n omega), reduced once."""
    check_int(n, "n", min_val=0)
    return (x + n * y + (n * (n - 1) // 2) * omega) & MASK, (y + n * omega) & MASK


@dataclass(frozen=True)
class CocycleParams:
    lam: float
    E: float
    omega: int = OMEGA

    def __post_init__(self):
        check_lambda(self.lam)
        check_scalar(self.E, "E")
        band = 2 + 2 * self.lam
        if abs(self.E) > band:
            raise ValueError(f"|E| = {abs(self.E)} exceeds 2 + 2 lambda = {band}")


@dataclass
class ScaledMatrix:
    """The 2x2 matrix ``exp(log_scale) * m``."""

    m: tuple
    log_scale: float = 0.0

    def array(self) -> np.ndarray:
        a, b, c, d = self.m
        return np.array([[a, b], [c, d]])

    def log_norm(self) -> float:
        return self.log_scale + math.log(spectral_norm(*self.m))

    def det(self) -> float:
        a, b, c, d = self.m
        return (a * d - b * c) * math.exp(2 * self.log_scale)

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        a, b, c, d = self.m
        e, f, g, h = other.m
        m, shift = _renormalize(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return ScaledMatrix(m, self.log_scale + other.log_scale + shift)


def spectral_norm(a, b, c, d) -> float:
    """Largest singular value of [[a, b], [c, d]] from the closed form."""
    return 0.5 * (math.hypot(a + d, c - b) + math.hypot(a - d, b + c))


def _renormalize(a, b, c, d):
    big = max(abs(a), abs(b), abs(c), abs(d))
    _, e = math.frexp(big)
    return (math.ldexp(a, -e), math.ldexp(b, -e), math.ldexp(c, -e), math.ldexp(d, -e)), e * math.log(2.0)


def one_step_matrix(params: CocycleParams, phase: int) -> np.ndarray:
    t = params.E - 2.0 * params.lam * math.cos(_TWO_PI * frac_to_float(phase))
    return np.array([[t, -1.0], [1.0, 0.0]])


def transfer_product(params: CocycleParams, x: int, y: int, n: int) -> ScaledMatrix:
    """M_n(x, y) = M(T^n(x,y)) ... M(T^1(x,y)) with max-entry renormalization."""
    check_int(n, "n", min_val=0)
    lam2, E, omega = 2.0 * params.lam, params.E, params.omega
    x &= MASK
    y &= MASK
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    exponent = 0
    cos = math.cos
    for _ in range(n):
        x = (x + y) & MASK
        y = (y + omega) & MASK
        t = E - lam2 * cos(_TWO_PI * ((x >> 64) * 2.0 ** -64))
        a, b, c, d = t * a - c, t * b - d, a, b
        big = max(abs(a), abs(b), abs(c), abs(d))
        if big > _HIGH or big < _LOW:
            _, e = math.frexp(big)
            a, b, c, d = math.ldexp(a, -e), math.ldexp(b, -e), math.ldexp(c, -e), math.ldexp(d, -e)
            exponent += e
    if n:
        _, e = math.frexp(max(abs(a), abs(b), abs(c), abs(d)))
        a, b, c, d = math.ldexp(a, -e), math.ldexp(b, -e), math.ldexp(c, -e), math.ldexp(d, -e)
        exponent += e
    return ScaledMatrix((a, b, c, d), exponent * math.log(2.0))


def u_n(params: CocycleParams, x: int, y: int, n: int) -> float:
    """(1/n) log ||M_n(x, y)|| with the operator norm."""
    check_int(n, "n", min_val=1)
    return transfer_product(params, x, y, n).log_norm() / n


def transfer_product_mp(params: CocycleParams, x: int, y: int, n: int, dps: int = 40):
    """Unrenormalized product in mpmath at ``dps`` digits (reference path).

    Phases are converted exactly from their 128-bit numerators.
    """
    import mpmath

    with mpmath.workdps(dps):
        lam2 = 2 * mpmath.mpf(params.lam)
        E = mpmath.mpf(params.E)
        two_pi = 2 * mpmath.pi
        a, b, c, d = mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(1)
        x &= MASK
        y &= MASK
        for _ in range(n):
            x = (x + y) & MASK
            y = (y + params.omega) & MASK
            t = E - lam2 * mpmath.cos(two_pi * mpmath.mpf(x) / ONE)
            a, b, c, d = t * a - c, t * b - d, a, b
        return mpmath.matrix([[a, b], [c, d]])


def log_norm_mp(P, dps: int = 40):
    import mpmath

    with mpmath.workdps(dps):
        a, b, c, d = P[0, 0], P[0, 1], P[1, 0], P[1, 1]
        s = (mpmath.sqrt((a + d) ** 2 + (c - b) ** 2) + mpmath.sqrt((a - d) ** 2 + (b + c) ** 2)) / 2
        return mpmath.log(s)


# -- regularized (Herman) form -------------------------------------------------

def half_angle_phase(j: int, omega: int = OMEGA) -> complex:
    """a**(j(j-1)) with a = e(omega/2), i.e. e(j(j-1) omega / 2), reduced exactly."""
    v = ((j * (j - 1) // 2) * omega) & MASK
    return cmath.exp(1j * _TWO_PI * frac_to_float(v))


def regularized_matrix_A(lam, E, z: complex, w: complex, a: complex) -> np.ndarray:
    if not math.isclose(abs(a), 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"|a| must be 1, got {abs(a)}")
    zw = z * w
    return np.array([[E * zw - lam * zw * zw * a - lam * a.conjugate(), -zw],
                     [zw, 0.0]], dtype=complex)


def v_n(lam, E, z: complex, w: complex, n: int, omega: int = OMEGA) -> float:
    """(1/n) log ||prod_{j=n..1} A(E, z, w^j, a^(j(j-1)))||."""
    check_int(n, "n", min_val=1)
    P = np.eye(2, dtype=complex)
    log_scale = 0.0
    for j in range(1, n + 1):
        P = regularized_matrix_A(lam, E, z, w ** j, half_angle_phase(j, omega)) @ P
        big = np.abs(P).max()
        if big == 0.0:
            return -math.inf
        P /= big
        log_scale += math.log(big)
    return (log_scale + math.log(np.linalg.norm(P, 2))) / n


def u_n_from_norms(lam, E, x: int, y: int, n: int, omega: int = OMEGA) -> float:
    """u_n evaluated through the regularized form on the unit torus."""
    z = cmath.exp(1j * _TWO_PI * frac_to_float(x))
    w = cmath.exp(1j * _TWO_PI * frac_to_float(y))
    return v_n(lam, E, z, w, n, omega)


# -- vectorized batch path -----------------------------------------------------

def split_limbs(values) -> tuple[np.ndarray, np.ndarray]:
    """128-bit ints -> (hi, lo) uint64 arrays."""
    vals = [int(v) & MASK for v in values]
    hi = np.array([v >> 64 for v in vals], dtype=np.uint64)
    lo = np.array([v & _LIMB for v in vals], dtype=np.uint64)
    return hi, lo


def _add128(hi, lo, bhi, blo):
    new_lo = lo + blo
    carry = (new_lo < lo).astype(np.uint64)
    return hi + bhi + carry, new_lo


def batch_log_norms(params: CocycleParams, x_hi, x_lo, y_hi, y_lo, checkpoints,
                    renorm_every: int = 16) -> dict:
    """log ||M_n(x_i, y_i)|| for every sample i and every n in ``checkpoints``.

    All samples advance together; longer checkpoints reuse the shorter prefix.
    Returns ``{n: array}``.
    """
    checkpoints = sorted(set(int(c) for c in checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise ValueError("checkpoints must be positive integers")
    omega_hi = np.uint64(params.omega >> 64)
    omega_lo = np.uint64(params.omega & _LIMB)
    x_hi, x_lo = np.array(x_hi, dtype=np.uint64), np.array(x_lo, dtype=np.uint64)
    y_hi, y_lo = np.array(y_hi, dtype=np.uint64), np.array(y_lo, dtype=np.uint64)
    size = x_hi.shape[0]
    a = np.ones(size)
    b = np.zeros(size)
    c = np.zeros(size)
    d = np.ones(size)
    exponent = np.zeros(size, dtype=np.int64)
    scale = 2.0 ** -64
    lam2, E = 2.0 * params.lam, params.E
    out = {}
    t = np.empty(size)
    targets = iter(checkpoints)
    target = next(targets)
    for step in range(1, checkpoints[-1] + 1):
        x_hi, x_lo = _add128(x_hi, x_lo, y_hi, y_lo)
        y_hi, y_lo = _add128(y_hi, y_lo, omega_hi, omega_lo)
        np.multiply(x_hi, scale, out=t)
        t *= _TWO_PI
        np.cos(t, out=t)
        t *= -lam2
        t += E
        a, b, c, d = t * a - c, t * b - d, a, b
        if step % renorm_every == 0 or step == target:
            big = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.maximum(np.abs(c), np.abs(d)))
            _, e = np.frexp(big)
            a = np.ldexp(a, -e)
            b = np.ldexp(b, -e)
            c = np.ldexp(c, -e)
            d = np.ldexp(d, -e)
            exponent += e
        if step == target:
            norm = 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, b + c))
            out[target] = exponent * math.log(2.0) + np.log(norm)
            target = next(targets, None)
    return out
