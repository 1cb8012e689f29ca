"""Explicit constants of the Riesz-representation and splitting estimates.

Every function takes ``interval=False`` (plain doubles through :mod:`math`)
or ``interval=True`` (outward-rounded mpmath intervals at the current
``iv.prec``).  Interval mode expects exact inputs (ints, Fractions, or
floats, which are converted exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real

from mpmath import iv

from .ledger import Ledger, endpoints, hull, precision, to_iv
from .validation import check_scalar

# Parameters of the multiscale scheme.
DELTA = Fraction(1, 8)
DELTA2 = 1
DELTA3 = 2
DELTA4 = Fraction(3, 2)
C2 = 203
C4_TIMES_PI = 145
C5_TIMES_PI = 850


class _FloatOps:
    interval = False
    log = staticmethod(math.log)
    sqrt = staticmethod(math.sqrt)
    exp = staticmethod(math.exp)
    cos = staticmethod(math.cos)

    @property
    def pi(self):
        return math.pi

    @staticmethod
    def num(x):
        return float(x)

    @staticmethod
    def pow(x, p):
        return float(x) ** float(p)


class _IntervalOps:
    interval = True

    @staticmethod
    def log(x):
        return iv.log(x)

    @staticmethod
    def sqrt(x):
        return iv.sqrt(x)

    @staticmethod
    def exp(x):
        return iv.exp(x)

    @staticmethod
    def cos(x):
        return iv.cos(x)

    @property
    def pi(self):
        return iv.pi + 0

    @staticmethod
    def num(x):
        return to_iv(x)

    @staticmethod
    def pow(x, p):
        return iv.exp(to_iv(p) * iv.log(to_iv(x)))


FLOAT = _FloatOps()
INTERVAL = _IntervalOps()


def ops(interval: bool):
    return INTERVAL if interval else FLOAT


@dataclass(frozen=True)
class Radii:
    R: Real = 4
    R1: Real = 3
    R2: Real = 2

    def __post_init__(self):
        for name in ("R", "R1", "R2"):
            check_scalar(getattr(self, name), name)
        if not 1 < self.R2 < self.R1 < self.R:
            raise ValueError(f"need 1 < R2 < R1 < R, got {self.R}, {self.R1}, {self.R2}")

    def exact(self):
        return Fraction(self.R), Fraction(self.R1), Fraction(self.R2)


DEFAULT_RADII = Radii(4, 3, 2)


def b0(radii: Radii, interval=False):
    o = ops(interval)
    R, R1, R2 = radii.exact()
    gap = R * R - R1 * R1
    if gap == R:
        raise ValueError("B0 undefined on the branch boundary R^2 - R1^2 = R")
    R_, R1_, R2_ = o.num(R), o.num(R1), o.num(R2)
    branch = o.log(R_) if gap > R else o.log(o.num(R * R / gap))
    return (R1_ + R2_) / (R1_ - R2_) * branch / (2 * o.log(R_ / R1_))


def b1(radii: Radii, interval=False):
    o = ops(interval)
    R2 = o.num(radii.R2)
    return b0(radii, interval) * 8 * R2 / (R2 * R2 - 1)


def b2(radii: Radii, interval=False):
    o = ops(interval)
    R2 = o.num(radii.R2)
    s = R2 * R2
    root = o.sqrt(s * s + 34 * s + 1)
    num = 16 * o.pi * (s - 1) * o.sqrt(16 * s - (root - 1 - s) ** 2)
    return b0(radii, interval) * num / (3 * s + 3 - root) ** 2


def b3(radii: Radii, interval=False):
    o = ops(interval)
    R, R1 = o.num(radii.R), o.num(radii.R1)
    return o.sqrt(5 * b2(radii, interval) + 10 * o.pi / o.log(R / R1))


def c_fourier(radii: Radii, interval=False):
    """Decay constant of the Fourier coefficients."""
    o = ops(interval)
    R, R1 = o.num(radii.R), o.num(radii.R1)
    return 1 / (2 * o.log(R / R1)) + b1(radii, interval) / (2 * o.pi)


def c0_exp(radii: Radii, interval=False):
    """Prefactor in the exponential-integrability estimate."""
    o = ops(interval)
    frac = o.num(Fraction(17, 144)) + b1(radii, interval) / (16 * b3(radii, interval) ** 2)
    return 2 * o.sqrt(o.num(2)) * o.exp(o.pi * frac)


def eps_small_margin(radii: Radii, interval=True):
    """B3^2 - 289 (B0 + 13 / (20 log(R/R1)))."""
    o = ops(interval)
    R, R1 = o.num(radii.R), o.num(radii.R1)
    rhs = 289 * (b0(radii, interval) + 13 / (20 * o.log(R / R1)))
    return b3(radii, interval) ** 2 - rhs


def check_eps_small(radii: Radii = DEFAULT_RADII):
    """Return ``(passed, margin)`` for the smallness condition, certified."""
    with precision():
        margin = eps_small_margin(radii, interval=True)
    lo, _ = endpoints(margin)
    return bool(lo > 0), margin


def _check_lambda(lam):
    check_scalar(lam, "lambda")
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if lam > 1:
        raise ValueError(f"lambda must be <= 1, got {lam}")


def u_lambda(lam, R3, interval=False):
    """Herman-type upper bound U(lambda, R3) for the regularized cocycle."""
    if not (interval and hasattr(lam, "a")):
        _check_lambda(lam)
    o = ops(interval)
    lam, R3 = o.num(lam), o.num(R3)
    inner = lam * (1 + 1 / (R3 * R3)) ** 2 + 2 / R3
    return o.log(inner * inner + 2 / (R3 * R3)) / 2


def b5m5(n, lam, R, interval=False):
    """(n+1) log R + U(lambda, R) - log lambda."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    o = ops(interval)
    return (n + 1) * o.log(o.num(R)) + u_lambda(lam, R, interval) - o.log(o.num(lam))


def b4m4(lam, R, interval=False):
    return b5m5(1, lam, R, interval)


def over_lambda(f, lo=Fraction(1, 2), hi=Fraction(1), pieces=32):
    """Interval hull of ``f(lam_iv)`` over ``[lo, hi]``, split into pieces.

    Subdivision tames the dependency problem when ``lam`` appears more than
    once in ``f``.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    step = (hi - lo) / pieces
    parts = []
    for k in range(pieces):
        a, b = lo + k * step, lo + (k + 1) * step
        parts.append(f(to_iv((a, b))))
    return hull(*parts)


def deviation_deltas(eps0, eps1, eps3, bm_first, bm_second, b6, radii=DEFAULT_RADII,
                     r=None, interval=False):
    """Deviation sizes (delta0, delta0_first, delta0_second).

    ``bm_first`` is B4 - m4, ``bm_second`` is B5 - m5; ``r`` defaults to
    (1 - 2 delta)/(7 - 4 delta) at delta = 1/8.
    """
    if r is None:
        r = split_exponent(DELTA)
    for name, v in (("eps0", eps0), ("eps1", eps1), ("eps3", eps3), ("b6", b6)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    if bm_first <= 0 or bm_second <= 0:
        raise ValueError("B - m must be positive")
    o = ops(interval)
    B3 = b3(radii, interval)
    e0, e1, e3 = o.num(eps0), o.num(eps1), o.num(eps3)
    r = o.num(r)
    nine_half = o.num(Fraction(9, 2))
    d0 = nine_half * e0 + 2 * B3 * o.sqrt(e1 * o.num(bm_first))
    d1 = nine_half * e0 + 2 * B3 * o.sqrt(_power(o, e1, r) * o.num(bm_first))
    d2 = nine_half * e3 + 4 * B3 * o.sqrt(o.num(b6)) * o.sqrt(
        _power(o, e1, 1 - r) * o.num(bm_second))
    return d0, d1, d2


def _power(o, x, p):
    if (not o.interval and x == 0) or (o.interval and endpoints(x)[1] == 0):
        return o.num(0)
    return o.pow(x, p)


def split_exponent(delta=DELTA):
    delta = Fraction(delta)
    return (1 - 2 * delta) / (7 - 4 * delta)


@dataclass(frozen=True)
class ConstantsTable:
    B0: object
    B1: object
    B2: object
    B3: object
    C: object
    C0: object
    U1: object
    U_R: object
    B4m4: object
    lam: object
    R: object
    interval: bool

    def b5m5(self, n):
        return b5m5(n, self.lam, self.R, self.interval)

    def as_dict(self):
        return {k: getattr(self, k) for k in ("B0", "B1", "B2", "B3", "C", "C0", "U1", "U_R", "B4m4")}


def constants_table(radii: Radii = DEFAULT_RADII, lam=Fraction(1, 2), interval=False):
    return ConstantsTable(
        B0=b0(radii, interval), B1=b1(radii, interval), B2=b2(radii, interval),
        B3=b3(radii, interval), C=c_fourier(radii, interval), C0=c0_exp(radii, interval),
        U1=u_lambda(lam, 1, interval), U_R=u_lambda(lam, radii.R, interval),
        B4m4=b4m4(lam, radii.R, interval), lam=lam, R=radii.R, interval=interval,
    )


def c4(interval=True):
    o = ops(interval)
    return o.num(C4_TIMES_PI) / o.pi


def c5(interval=True):
    o = ops(interval)
    return o.num(C5_TIMES_PI) / o.pi


def numeric_ledger(radii: Radii = DEFAULT_RADII, lams=(Fraction(1, 2), Fraction(1)),
                   ledger: Ledger | None = None) -> Ledger:
    """Certified checks of the numeric facts about the constants at fixed radii."""
    led = ledger if ledger is not None else Ledger()
    with precision():
        o = INTERVAL
        B3 = b3(radii, True)
        C0 = c0_exp(radii, True)
        log2 = o.log(o.num(2))
        led.check("eps_small margin", eps_small_margin(radii, True), ">", 61)
        led.check("C < 11.97", c_fourier(radii, True), "<", Fraction("11.97"))
        led.check("2 sqrt(2 C0) + C0 < 10", 2 * o.sqrt(2 * C0) + C0, "<", 10)
        led.check("U(1,4) > 1/2", u_lambda(1, 4, True), ">", Fraction(1, 2))
        for lam in lams:
            lam = Fraction(lam)
            tag = f"[lambda={lam}]"
            # U(lam,1) = log((4 lam + 2)^2 + 2)/2, so the comparison with log(38)/2
            # is decided on the rational argument of the logarithm.
            led.check(f"U(lambda,1) <= log(38)/2 {tag}", (4 * lam + 2) ** 2 + 2, "<=", 38,
                      note="compared on the argument of log")
            U1 = u_lambda(lam, 1, True)
            bm = b4m4(lam, radii.R, True)
            led.check(f"4 U(lambda,1) >= 2 log 6 {tag}", 4 * U1, ">=", 2 * o.log(o.num(6)))
            led.check(f"B4-m4 >= 4 log 2 + 1/2 {tag}", bm, ">=", 4 * log2 + o.num(Fraction(1, 2)))
            led.check(f"B4-m4 <= 4 log 2 + 1 {tag}", bm, "<=", 4 * log2 + 1)
            led.check(f"48 B3 sqrt(2 U1 (B4-m4)) < 11518 {tag}",
                      48 * B3 * o.sqrt(2 * U1 * bm), "<", 11518)
            led.check(f"96 B3 U1 sqrt(2 log 2) < 13317 {tag}",
                      96 * B3 * U1 * o.sqrt(2 * log2), "<", 13317)
        log10_12 = 12 * o.log(o.num(10))
        led.check("144 + (11518/203)(12 log 10)^-2.3 < 145",
                  144 + o.num(Fraction(11518, 203)) * o.pow(log10_12, Fraction(-23, 10)), "<", 145)
        led.check("831 + (13317/203)(12 log 10)^-3.8 < 850",
                  831 + o.num(Fraction(13317, 203)) * o.pow(log10_12, Fraction(-38, 10)), "<", 850)
        led.check("C4 > 46", c4(), ">", 46)
        led.check("C4 < 47", c4(), "<", 47)
        led.check("C5 > 270", c5(), ">", 270)
        led.check("C2 C5 < 5.5e4", C2 * c5(), "<", 55000)
    return led
