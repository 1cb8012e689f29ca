"""Interval-certified replay of the multiscale induction for the skew-shift
cocycle, from initial-scale data to the lower bound L >= L_{N0}/2.

Scales such as N0**9 cannot be formed as numbers, so every inequality that
involves them is rewritten through logarithms and evaluated on outward-rounded
mpmath intervals.  Rational facts (bookkeeping fractions, exponent identities)
are decided exactly.  Each inequality becomes a :class:`~skewlyap.ledger.LedgerEntry`;
proofs are replayed in order and the first entry that does not pass is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from mpmath import iv

from . import constants as K
from .ledger import FAIL, INDETERMINATE, PASS, Ledger, LedgerEntry, endpoints, fmt, precision, to_iv

# Nj L_Nj beyond this only makes exp(-Nj L_Nj / 2) smaller; capping keeps bounds valid.
_EXPONENT_CAP = 10 ** 6
_MAX_EXACT_BITS = 1 << 14
SEQUENCE_RATIO = 9


class PreconditionError(ValueError):
    """A hypothesis of an induction step failed at the interval endpoints."""

    def __init__(self, name: str, entry: LedgerEntry | None = None):
        super().__init__(f"precondition {name} does not hold")
        self.name = name
        self.entry = entry


@dataclass(frozen=True)
class LogScale:
    """The scale ``base ** power``, handled through ``log N = power * log(base)``."""

    base: int
    power: int = 1

    def __post_init__(self):
        if isinstance(self.base, bool) or not isinstance(self.base, int) or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")
        if isinstance(self.power, bool) or not isinstance(self.power, int) or self.power < 1:
            raise ValueError(f"power must be a positive integer, got {self.power!r}")

    @classmethod
    def of(cls, n) -> "LogScale":
        return n if isinstance(n, LogScale) else cls(int(n))

    def log(self):
        return self.power * iv.log(iv.mpf(self.base))

    def exact(self):
        """The integer N, or None when it is too large to be worth forming."""
        if self.power * self.base.bit_length() > _MAX_EXACT_BITS:
            return None
        return self.base ** self.power

    def value(self):
        e = self.exact()
        return iv.mpf(e) if e is not None else iv.exp(self.log())

    def next(self, ratio: int = SEQUENCE_RATIO) -> "LogScale":
        return LogScale(self.base, self.power * ratio)

    def __str__(self):
        return str(self.base) if self.power == 1 else f"{self.base}^{self.power}"


def divides(n: LogScale, N: LogScale):
    """True/False when decidable exactly, None otherwise."""
    a, b = n.exact(), N.exact()
    if a is not None and b is not None:
        return b % a == 0
    if n.base == N.base:
        return n.power <= N.power
    return None


@dataclass(frozen=True)
class DeviationParams:
    delta: Fraction = K.DELTA
    delta2: Fraction = Fraction(K.DELTA2)
    delta3: Fraction = Fraction(K.DELTA3)
    delta4: Fraction = K.DELTA4
    C2: Fraction = Fraction(K.C2)
    C4_times_pi: Fraction = Fraction(K.C4_TIMES_PI)
    C5_times_pi: Fraction = Fraction(K.C5_TIMES_PI)
    a: Fraction = Fraction(7)

    def __post_init__(self):
        if not 0 < self.delta < Fraction(1, 2):
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta}")
        for name in ("delta2", "delta3", "delta4", "C2", "C4_times_pi", "C5_times_pi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.a < 7:
            raise ValueError(f"a must be >= 7, got {self.a}")

    @property
    def C4(self):
        return to_iv(self.C4_times_pi) / iv.pi

    @property
    def C5(self):
        return to_iv(self.C5_times_pi) / iv.pi

    @property
    def step_exponent(self) -> Fraction:
        """-7/5 + 4 delta/5, the power of N in the induction error terms."""
        return Fraction(-7, 5) + Fraction(4, 5) * self.delta

    @property
    def measure_exponent(self) -> Fraction:
        """-12/5 + 4 delta/5, the power of N in the measure hypothesis."""
        return Fraction(-12, 5) + Fraction(4, 5) * self.delta


DEFAULT_PARAMS = DeviationParams()


@dataclass(frozen=True)
class Variant:
    name: str
    N0: int
    N1: LogScale
    a_first: int
    threshold: Fraction
    power: int
    ldt_log10: int  # function-level LDT-size bound holds for x >= 10**ldt_log10
    first_bound: int | None = None  # integer bound on the first-step scale ratio

    @property
    def scale0(self) -> LogScale:
        return LogScale(self.N0)

    def scales(self, count: int) -> list:
        out = [self.scale0, self.N1]
        while len(out) < count:
            out.append(out[-1].next())
        return out[:count]


VARIANTS = {
    "main": Variant("main", 2 * 10 ** 37, LogScale(2 * 10 ** 37, 9), 7, Fraction(2, 10 ** 4), 21, 334),
    "main2": Variant("main2", 3 * 10 ** 5, LogScale(3 * 10 ** 334), 60, Fraction(2, 10 ** 4), 141, 334, 29974),
    "main3": Variant("main3", 3 * 10 ** 4, LogScale(3 * 10 ** 320), 60, Fraction(2, 10 ** 3), 165, 320, 2938),
}


def get_variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        raise ValueError(f"unknown variant {name!r}; choose from {sorted(VARIANTS)}") from None


# -- interval helpers ----------------------------------------------------------

def _lo(x):
    return iv.mpf(endpoints(x)[0])


def _hi(x):
    return iv.mpf(endpoints(x)[1])


def _pow(t, p):
    """t**p for an interval t > 0 and rational p."""
    p = Fraction(p)
    if p.denominator == 1 and 0 <= p <= 8:
        return to_iv(t) ** int(p)
    return iv.exp(to_iv(p) * iv.log(to_iv(t)))


def _log(x):
    return iv.log(to_iv(x))


def _monotone_domain(t0):
    """The unbounded interval [t0, +inf) used to certify derivative signs."""
    return iv.mpf([endpoints(t0)[0], "inf"])


@lru_cache(maxsize=8)
def _hull_constants(prec: int, radii: K.Radii = K.DEFAULT_RADII) -> dict:
    """Radius constants and lambda-dependent quantities hulled over [1/2, 1]."""
    R = to_iv(radii.R)
    return {
        "C": K.c_fourier(radii, True),
        "C0": K.c0_exp(radii, True),
        "B1": K.b1(radii, True),
        "B3": K.b3(radii, True),
        "U1": K.over_lambda(lambda lam: K.u_lambda(lam, 1, True)),
        "B4m4": K.over_lambda(lambda lam: K.b4m4(lam, radii.R, True)),
        # U(lambda, R) - log(lambda)
        "K": K.over_lambda(lambda lam: K.u_lambda(lam, radii.R, True) - iv.log(lam)),
        "logR": iv.log(R),
    }


def hull_constants(radii: K.Radii = K.DEFAULT_RADII) -> dict:
    return _hull_constants(iv.prec, radii)


def _interval_input(x):
    """Fractions and ints stay exact; everything else becomes an interval."""
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    return to_iv(x)


def _times(n: LogScale, L):
    """n * L, exact when both are exact."""
    e = n.exact()
    if e is not None and isinstance(L, Fraction):
        return e * L
    return n.value() * to_iv(L)


def _capped_exponent(n: LogScale, L):
    """Lower bound of n*L/2, capped so exp(-x) stays cheap."""
    x = _lo(n.value() * to_iv(L))
    cap = iv.mpf(_EXPONENT_CAP)
    return (x if endpoints(x)[0] < _EXPONENT_CAP else cap) / 2


def _e_term(n: LogScale, L, coeff):
    """Upper bound for coeff/n * exp(-n L / 2), via logarithms."""
    return iv.exp(_log(coeff) - n.log() - _capped_exponent(n, L))


# -- one induction step --------------------------------------------------------

def induction_step(n, N, L_n, L_2n, C3, delta=K.DELTA):
    """Certified (L_N lower bound, L_N - L_2N upper bound) from scale n to N.

    ``n`` and ``N`` are ints or :class:`LogScale`; ``L_n``, ``L_2n``, ``C3``
    are exact rationals or intervals.  The measure hypothesis is not checked
    here; callers supply it.
    """
    n, N = LogScale.of(n), LogScale.of(N)
    led = Ledger()
    d = divides(n, N)
    if d is not True:
        raise PreconditionError("n divides N")
    L_n, L_2n = _interval_input(L_n), _interval_input(L_2n)
    e = led.check("(a) n L_n >= 7", _times(n, L_n), ">=", 7)
    if not e.passed:
        raise PreconditionError("(a) n L_n >= 7", e)
    e = led.check("(b) L_n - L_2n <= L_n/8", Fraction(7, 8) * L_n if isinstance(L_n, Fraction) else
                  to_iv(Fraction(7, 8)) * L_n, "<=", L_2n)
    if not e.passed:
        raise PreconditionError("(b) L_n - L_2n <= L_n/8", e)
    ratio = iv.exp(n.log() - N.log())
    p = Fraction(-7, 5) + Fraction(4, 5) * Fraction(delta)
    N_term = iv.exp(to_iv(p) * N.log())
    Ln, L2n = to_iv(L_n), to_iv(L_2n)
    c = 2 - 2 * ratio
    # L_n - c (L_n - L_2n) = (1 - c) L_n + c L_2n, increasing in both arguments.
    lower = (1 - _hi(c)) * _lo(Ln) + _hi(c) * _lo(L2n)
    lower = iv.mpf(endpoints(lower)[0]) - _hi(_e_term(n, Ln, 11)) - _hi(8 * to_iv(C3) * N_term)
    diff = _hi(Ln - L2n)
    diff_upper = _hi(ratio) * iv.mpf([0, endpoints(diff)[1]]) if endpoints(diff)[1] > 0 else iv.mpf(0)
    diff_upper = _hi(diff_upper + _e_term(n, Ln, 22) + 24 * to_iv(C3) * N_term)
    return _lo(lower), diff_upper


# -- sequence of scales --------------------------------------------------------

def bookkeeping_ledger(ledger: Ledger | None = None) -> Ledger:
    """The rational bookkeeping that closes the induction over scales."""
    led = ledger if ledger is not None else Ledger()
    alpha = Fraction(11, 512) + Fraction(8, 1280)
    beta = Fraction(22, 512) + Fraction(24, 1280)
    led.check("alpha sum bound = 71/2560", alpha, "<=", Fraction(71, 2560))
    led.check("beta sum bound = 79/1280", beta, "<=", Fraction(79, 1280))
    # 8 (L_N - L_2N) - L_N <= -L0 + (2 + 6/10) L0/8 + sum alpha + 8 sum beta
    led.check("8 diff - L bound <= -393/2560",
              -1 + Fraction(26, 10) / 8 + alpha + 8 * beta, "<=", Fraction(-393, 2560))
    led.check("-393/2560 < 0", Fraction(-393, 2560), "<", 0)
    lower = 1 - Fraction(9, 5) / 8 - alpha - Fraction(9, 5) * beta
    led.check("L_Nj lower fraction >= 8143/12800", lower, ">=", Fraction(8143, 12800))
    led.check("(7/8)(8143/12800) >= 1/2", Fraction(7, 8) * Fraction(8143, 12800), ">=", Fraction(1, 2))
    led.check("8143/12800 N_j-scale gives N L >= 7 (ratio >= 10)", Fraction(8143, 12800) * 10, ">=", 1)
    return led


@dataclass
class ScaleBound:
    j: int
    L_N_lower: object
    diff_upper: object
    L_2N_lower: object

    def to_dict(self):
        return {"j": self.j, "L_N_lower": fmt(self.L_N_lower), "diff_upper": fmt(self.diff_upper),
                "L_2N_lower": fmt(self.L_2N_lower)}


def sequence_scheme(scales, L0, L2, C3, delta=K.DELTA, ledger: Ledger | None = None):
    """Replay the multiscale bookkeeping over ``scales`` = [N_0, ..., N_J].

    Checks hypotheses (1)-(3) for every j (the measure hypothesis (4) is the
    caller's) and returns ``(bounds, ledger)`` with one :class:`ScaleBound`
    per j.  Stops at the first hypothesis that does not pass.
    """
    scales = [LogScale.of(s) for s in scales]
    led = ledger if ledger is not None else Ledger()
    if not scales:
        raise ValueError("need at least the initial scale")
    L0, L2 = _interval_input(L0), _interval_input(L2)
    L0i, L2i, C3i = to_iv(L0), to_iv(L2), to_iv(C3)
    p = Fraction(-7, 5) + Fraction(4, 5) * Fraction(delta)
    logs = [s.log() for s in scales]
    for m in range(1, len(scales)):
        e = led.check(f"N_{m}/N_{m-1} >= 10", logs[m] - logs[m - 1], ">=", iv.log(10))
        if not e.passed:
            return [], led
        d = divides(scales[m - 1], scales[m])
        led.check(f"N_{m-1} divides N_{m}", 1 if d else 0, ">=", 1,
                  note="decided exactly" if d is not None else "not decidable; treated as failure")
        if not d:
            return [], led
    e1 = led.check("(1) N0 L_N0 >= 7", _times(scales[0], L0), ">=", 7)
    e2 = led.check("(1) L_N0 - L_2N0 <= L_N0/8",
                   Fraction(7, 8) * L0 if isinstance(L0, Fraction) else to_iv(Fraction(7, 8)) * L0i,
                   "<=", L2)
    if not (e1.passed and e2.passed):
        return [], led
    diff0 = iv.mpf([0, max(endpoints(L0i - L2i)[1], 0)])
    bounds = [ScaleBound(0, _lo(L0i), _hi(diff0), _lo(L2i))]
    alphas, betas = [], []
    sum_e, sum_p = iv.mpf(0), iv.mpf(0)
    for j in range(1, len(scales)):
        prev = bounds[j - 1]
        e_term = _e_term(scales[j - 1], prev.L_N_lower, 1)
        n_term = iv.exp(to_iv(p) * logs[j])
        sum_e, sum_p = sum_e + e_term, sum_p + n_term
        e = led.check(f"(2) j={j}: sum exp terms < L_N0/512", _hi(sum_e), "<", _lo(L0i) / 512)
        if not e.passed:
            break
        e = led.check(f"(3) j={j}: sum N_m^(-7/5+4d/5) < L_N0/(1280 C3)", _hi(sum_p), "<",
                      _lo(L0i) / (1280 * _hi(C3i)))
        if not e.passed:
            break
        alphas.append(_hi(11 * e_term + 8 * C3i * n_term))
        betas.append(_hi(22 * e_term + 24 * C3i * n_term))
        ratio0 = iv.exp(logs[0] - logs[j])
        c0 = 2 - 2 * ratio0
        lower = (1 - _hi(c0)) * _lo(L0i) + _hi(c0) * _lo(L2i)
        lower = _lo(lower) - sum(alphas, iv.mpf(0))
        for m in range(1, j):
            lower = lower - (2 - 2 * iv.exp(logs[m] - logs[j])) * betas[m - 1]
        diff = _hi(ratio0 * diff0)
        for m in range(1, j + 1):
            diff = diff + iv.exp(logs[m] - logs[j]) * betas[m - 1]
        lower, diff = _lo(lower), _hi(diff)
        bounds.append(ScaleBound(j, lower, diff, _lo(lower - diff)))
        led.check(f"j={j}: L_N - L_2N <= L_N/8", diff, "<=", lower / 8)
        led.check(f"j={j}: L_N >= (8143/12800) L_N0", lower, ">=", to_iv(Fraction(8143, 12800)) * _lo(L0i))
        led.check(f"j={j}: L_2N >= L_N0/2", bounds[-1].L_2N_lower, ">=", _lo(L0i) / 2)
        led.check(f"j={j}: N L_N >= 7", scales[j].value() * lower, ">=", 7)
    return bounds, led


# -- side conditions (I)-(XI) of the deviation estimate ------------------------

def deviation_conditions(n, Ntilde, L_n, L_2n, params: DeviationParams = DEFAULT_PARAMS,
                      constants: dict | None = None, tag: str = "") -> Ledger:
    """The eleven side conditions at scale ``Ntilde``, in log form.

    ``Ntilde`` may be a :class:`LogScale` or ``("2x", LogScale)`` for 2N.
    Lambda-dependent constants are hulled over [1/2, 1].
    """
    c = constants if constants is not None else hull_constants()
    n = LogScale.of(n)
    if isinstance(Ntilde, tuple):
        t = Ntilde[1].log() + iv.log(2)
    else:
        t = LogScale.of(Ntilde).log()
    s = n.log()
    nv = n.value()
    d, d2, d3, d4 = params.delta, params.delta2, params.delta3, params.delta4
    C, C0, B1, B3, U1, bm, Kl, logR = (c[k] for k in ("C", "C0", "B1", "B3", "U1", "B4m4", "K", "logR"))
    C2 = to_iv(params.C2)
    logt = iv.log(t)
    p_step = params.step_exponent
    sfx = f" {tag}" if tag else ""
    led = Ledger()
    led.check("(I) C((2n+1)log R + U - log lam) <= N^d" + sfx,
              iv.log(C) + iv.log((2 * nv + 1) * logR + Kl), "<=", to_iv(d) * t, note="log form")
    led.check("(II) N >= 38" + sfx, t, ">=", iv.log(38), note="log form")
    led.check("(III) exp(4 (log N)^d2) >= N + 1" + sfx,
              4 * _pow(t, d2), ">=", t + iv.log(1 + iv.exp(-t)), note="log form")
    lhs4 = (21 * iv.exp(to_iv(Fraction(-9, 10) + Fraction(9, 5) * d) * t
                        + to_iv(Fraction(9, 10) + Fraction(9, 5) * d2) * logt) + 4 * C * bm)
    led.check("(IV) 21 N^.. (ln N)^.. + 4C(B4-m4) <= N^d (log N)^d2" + sfx,
              iv.log(lhs4), "<=", to_iv(d) * t + to_iv(d2) * logt, note="log form")
    rhs_exp = (iv.log(C2) + to_iv(Fraction(-1, 10) + d / 5) * t
               + to_iv(Fraction(1, 10) + d2 / 5 + d3) * logt)
    diff = endpoints(to_iv(L_n) - to_iv(L_2n))[1]
    diff = iv.mpf(diff) if diff > 0 else iv.mpf(0)
    ratio = iv.exp(s - t)
    lhs5 = 2 * ratio * diff + 8 * U1 * iv.exp(to_iv(p_step) * t) + 5 * U1 * ratio
    led.check("(V) 2n/N (L_n-L_2n) + 8U N^.. + 5Un/N < C2 N^.. (ln N)^.." + sfx,
              iv.log(lhs5), "<", rhs_exp, note="log form")
    led.check("(VI) 22/n exp(-n L_n/2) < C2 N^.. (ln N)^.." + sfx,
              iv.log(22) - s - _capped_exponent(n, L_n), "<", rhs_exp, note="log form")
    bracket = (to_iv(Fraction(17, 36)) + B1 / (4 * B3 * B3)
               - C2 / (to_iv(Fraction(945, 2)) + to_iv(Fraction(16, 5)) * B3 * bm * iv.sqrt(C)) * _pow(t, d3))
    led.check("(VII) 4 sqrt2 exp(pi/4 [...]) <= N^(-7/5+4d/5)" + sfx,
              iv.log(4 * iv.sqrt(2)) + iv.pi / 4 * bracket, "<=", to_iv(p_step) * t, note="log form")
    lhs8 = (iv.log(2 * iv.sqrt(2)) - iv.log(C * bm) + to_iv(Fraction(1, 5) - 2 * d / 5) * t
            + to_iv(Fraction(-1, 5) - 2 * d2 / 5) * logt - 2 * _pow(t, d2))
    led.check("(VIII) 2 sqrt2 (C(B4-m4))^-1 N^.. (ln N)^.. exp(-2 (ln N)^d2) <= N^(-7/5+4d/5)" + sfx,
              lhs8, "<=", to_iv(p_step) * t, note="log form")
    led.check("(IX) N > (log R + U - log lam)/log R" + sfx, t, ">", iv.log((logR + Kl) / logR),
              note="log form")
    led.check("(X) C4 (log N)^d4 > 4" + sfx, params.C4 * _pow(t, d4), ">", 4)
    led.check("(XI) C5 (log N)^d4 > C4" + sfx, params.C5 * _pow(t, d4), ">", params.C4)
    return led


# -- simplified large-deviation step -------------------------------------------

def nN_entries(n, N, a, led: Ledger, tag: str = "") -> None:
    """Both scale-gap inequalities linking n and N, in log form."""
    n, N = LogScale.of(n), LogScale.of(N)
    t, s = N.log(), n.log()
    sfx = f" {tag}" if tag else ""
    led.check("scale ratio: 10^13 (n+1)^8 <= N" + sfx,
              13 * iv.log(10) + 8 * (s + iv.log(1 + iv.exp(-s))), "<=", t, note="log form")
    led.check("scale ratio: N/(log N)^(92/3) < (1/2)(203/22 e^(a/2) n)^(40/3)" + sfx,
              t - to_iv(Fraction(92, 3)) * iv.log(t), "<",
              -iv.log(2) + to_iv(Fraction(40, 3)) * (iv.log(to_iv(Fraction(203, 22))) + to_iv(Fraction(a)) / 2 + s),
              note="log form")


def ldt_bounds(Ntilde_log):
    """(log deviation size, log measure) of the certified LDT at log-scale t."""
    t = to_iv(Ntilde_log)
    dev = iv.log(to_iv(55000)) - to_iv(Fraction(3, 40)) * t + to_iv(Fraction(53, 10)) * iv.log(t)
    meas = iv.log(10) - _pow(t, Fraction(3, 2))
    return dev, meas


def _deviation_conclusion(t, led: Ledger, params: DeviationParams, c: dict, tag: str) -> None:
    """The deviation/measure bounds dominate the simplified LDT at log-scale t."""
    d, d2, d3, d4 = params.delta, params.delta2, params.delta3, params.delta4
    C2, C4, C5 = to_iv(params.C2), params.C4, params.C5
    C0, B3, U1, bm, logR = c["C0"], c["B3"], c["U1"], c["B4m4"], c["logR"]
    logt = iv.log(t)
    dev_full = (iv.log(C2 * C5) + to_iv(Fraction(-1, 10) + d / 5) * t
                + to_iv(Fraction(1, 10) + d2 / 5 + d3 + 2 * d4) * logt)
    dev_simple, meas_simple = ldt_bounds(t)
    led.check(f"LDT deviation size <= 5.5e4 N^(-3/40) (log N)^(53/10) {tag}", dev_full, "<=", dev_simple,
              note="log form")
    q = to_iv(Fraction(1, 10) + d2 / 5 + d3)
    k1 = iv.pi * C2 * C4 / (144 * C2 + 48 * B3 * iv.sqrt(2 * U1 * bm) * iv.exp(-q * logt))
    k2 = iv.pi * C2 * C5 / (18 * C2 * C4 + 96 * B3 * U1 * iv.sqrt(logR) * iv.exp(-(q + to_iv(d4)) * logt))
    td4 = _pow(t, d4)
    meas_full = iv.log(2 * iv.sqrt(2 * C0) * iv.exp(-k1 * td4) + C0 * iv.exp(-k2 * td4))
    led.check(f"LDT measure <= 10 exp(-(log N)^(3/2)) {tag}", meas_full, "<=", meas_simple, note="log form")


def ldt_step_check(n, N, a, L_n, L_2n, measure_hypothesis_ok: bool,
                 params: DeviationParams = DEFAULT_PARAMS, ledger: Ledger | None = None):
    """Hypotheses and conclusion of the simplified large-deviation proposition.

    Returns ``(ledger, ldt)`` where ``ldt`` maps ``"N"``/``"2N"`` to the
    certified (log deviation size, log measure) pair when every entry passes,
    else ``None``.
    """
    n, N = LogScale.of(n), LogScale.of(N)
    led = ledger if ledger is not None else Ledger()
    start = len(led)
    a = Fraction(a)
    if a < 7:
        raise ValueError(f"a must be >= 7, got {a}")
    L_n, L_2n = _interval_input(L_n), _interval_input(L_2n)
    led.check(f"N >= 10^12 [N={N}]", N.log(), ">=", 12 * iv.log(10), note="log form")
    d = divides(n, N)
    led.check(f"n divides N [n={n}, N={N}]", 1 if d else 0, ">=", 1)
    nN_entries(n, N, a, led, f"[n={n}, a={a}]")
    led.check(f"(a) n L_n >= a [a={a}]", _times(n, L_n), ">=", a)
    led.check("(b) L_n - L_2n <= L_n/8",
              Fraction(7, 8) * L_n if isinstance(L_n, Fraction) else to_iv(Fraction(7, 8)) * L_n, "<=", L_2n)
    led.check("(c) max(|B_n|, |B_2n|) <= N^(-23/10)", 1 if measure_hypothesis_ok else 0, ">=", 1,
              note="hypothesis supplied by the caller")
    c = hull_constants()
    ldt = {}
    for label, Nt, t in (("N", N, N.log()), ("2N", ("2x", N), N.log() + iv.log(2))):
        led.extend(deviation_conditions(n, Nt, L_n, L_2n, params, c, tag=f"[{label}]"))
        _deviation_conclusion(t, led, params, c, f"[{label}]")
        ldt[label] = ldt_bounds(t)
    ok = all(e.passed for e in led.entries[start:])
    return led, (ldt if ok else None)


def ldt_reductions(ledger: Ledger | None = None, params: DeviationParams = DEFAULT_PARAMS) -> Ledger:
    """The reductions that make (I)-(XI) follow from the scale-ratio bounds, (a), (b) for every
    N >= 10^12, uniformly in n.  This closes every later induction step."""
    led = ledger if ledger is not None else Ledger()
    c = hull_constants()
    C, B1, B3, U1, bm, Kl, logR = (c[k] for k in ("C", "B1", "B3", "U1", "B4m4", "K", "logR"))
    log2 = iv.log(2)
    t12 = 12 * iv.log(10)
    led.check("U(lambda,4) - log(lambda) in (1/2, 1] over [1/2,1]", _hi(Kl), "<=", 1)
    led.check("U(lambda,4) - log(lambda) > 1/2 over [1/2,1]", _lo(Kl), ">", Fraction(1, 2))
    # (I): C((2n+1) 2log2 + K) <= 12 (4 log2 n + 2 log2 + 1) <= 36 (n+1) and 36^8 < 10^13.
    led.check("(I) C < 12", C, "<", 12)
    led.check("(I) 12 * 4 log 2 <= 36", 12 * 4 * log2, "<=", 36)
    led.check("(I) 12 (2 log 2 + 1) <= 36", 12 * (2 * log2 + 1), "<=", 36)
    led.check("(I) 36^8 < 10^13", 36 ** 8, "<", 10 ** 13)
    # (III): exp(4 log N) = N^4 >= N + 1 for N >= 2.
    led.check("(III) N^4 >= N + 1 at N = 2", 2 ** 4, ">=", 3)
    # (IV)
    led.check("(IV) 4 C (B4-m4) <= 181", 4 * C * bm, "<=", 181)
    t8 = 8 * iv.log(10)

    def h4(t):
        return iv.exp(t / 8) * t - 21 * iv.exp(to_iv(Fraction(-27, 40)) * t + to_iv(Fraction(27, 10)) * iv.log(t)) - 181

    led.check("(IV) N^(1/8) log N - 21 N^(-27/40)(log N)^(27/10) - 181 > 0 at N = 10^8", h4(t8), ">", 0)
    dom = _monotone_domain(t8)
    # d/dt of e^(t/8) t is positive; the subtracted term is decreasing once t > 4.
    led.check("(IV) -27/40 + 27/(10 t) < 0 for N >= 10^8",
              to_iv(Fraction(-27, 40)) + to_iv(Fraction(27, 10)) / dom, "<", 0, note="monotone tail")
    # (V)
    led.check("(V) L_n - L_2n <= U1/8 <= 1/4", _hi(U1) / 8, "<=", Fraction(1, 4))
    led.check("(V) 2 (1/4) + 5 U1 <= 21/2", to_iv(Fraction(1, 2)) + 5 * U1, "<=", Fraction(21, 2))
    led.check("(V) 8 U1 <= 16", 8 * U1, "<=", 16)
    led.check("(V) 21/(2 10^(13/8)) + 16 < 203 * 2^(-3/40)",
              to_iv(21) / (2 * _pow(to_iv(10), Fraction(13, 8))) + 16, "<", 203 * _pow(to_iv(2), Fraction(-3, 40)))
    # (VI) follows from the upper scale-ratio bound: the exponents agree.
    led.check("(VI) (92/3)(3/40) = 23/10", Fraction(92, 3) * Fraction(3, 40), "<=", Fraction(23, 10))
    led.check("(VI) 23/10 = 1/10 + d2/5 + d3",
              Fraction(1, 10) + params.delta2 / 5 + params.delta3, ">=", Fraction(23, 10))
    # (VII)
    led.check("(VII) 4 sqrt 2 <= 5.66", 4 * iv.sqrt(2), "<=", Fraction(566, 100))
    led.check("(VII) pi/4 (17/36 + B1/(4 B3^2)) <= 0.374",
              iv.pi / 4 * (to_iv(Fraction(17, 36)) + B1 / (4 * B3 * B3)), "<=", Fraction(374, 1000))
    led.check("(VII) pi/4 C2/(472.5 + 3.2 B3 (B4-m4) sqrt C) >= 0.05",
              iv.pi / 4 * to_iv(params.C2) / (to_iv(Fraction(945, 2)) + to_iv(Fraction(16, 5)) * B3 * bm * iv.sqrt(C)),
              ">=", Fraction(5, 100))
    led.check("(VII) 0.05 t^2 - 1.3 t - log 5.66 - 0.374 > 0 at N = 10^12",
              to_iv(Fraction(1, 20)) * t12 ** 2 - to_iv(Fraction(13, 10)) * t12
              - iv.log(to_iv(Fraction(566, 100))) - to_iv(Fraction(374, 1000)), ">", 0, note="log form")
    led.check("(VII) 0.1 t - 1.3 > 0 for N >= 10^12",
              to_iv(Fraction(1, 10)) * _monotone_domain(t12) - to_iv(Fraction(13, 10)), ">", 0, note="monotone tail")
    # (VIII)
    led.check("(VIII) 2 sqrt 2 / (C (4 log 2 + 1/2)) < 0.08",
              2 * iv.sqrt(2) / (_lo(C) * (4 * log2 + to_iv(Fraction(1, 2)))), "<", Fraction(8, 100))
    led.check("(VIII) B4-m4 >= 4 log 2 + 1/2 over [1/2,1]", bm, ">=", 4 * log2 + to_iv(Fraction(1, 2)))
    led.check("(VIII) N^(1/5) (log N)^(3/5) > 0.08 at N = 2",
              _pow(to_iv(2), Fraction(1, 5)) * _pow(log2, Fraction(3, 5)), ">", Fraction(8, 100))
    # (IX)
    led.check("(IX) (1 + log R)/log R < 10^12", (1 + logR) / logR, "<", 10 ** 12)
    # (X), (XI)
    led.check("(X) C4 (12 log 10)^(3/2) > 4", params.C4 * _pow(t12, Fraction(3, 2)), ">", 4)
    led.check("(XI) C5 (12 log 10)^(3/2) > C4", params.C5 * _pow(t12, Fraction(3, 2)), ">", params.C4)
    # Conclusion: pi C4 / 145 = 1 and pi C5 / 850 = 1 by the choice of C4, C5.
    led.check("pi C4 = 145", params.C4_times_pi, ">=", 145)
    led.check("pi C5 = 850", params.C5_times_pi, ">=", 850)
    led.check("18 C4 < 831", 18 * params.C4, "<", 831)
    return led


# -- scale lemmas --------------------------------------------------------------

def scales_lemma_check(variant: str, ledger: Ledger | None = None) -> Ledger:
    """Scale-sequence inequalities: the first step directly, the rest through
    function-level inequalities with certified monotone tails."""
    v = get_variant(variant)
    led = ledger if ledger is not None else Ledger()
    tag = f"[{v.name}]"
    n0, N1 = v.scale0, v.N1
    t1 = N1.log()
    # First step n = N0, N = N1.
    nN_entries(n0, N1, v.a_first, led, f"{tag} j=0, a={v.a_first}")
    if v.first_bound is not None:
        bound = iv.exp(to_iv(Fraction(3, 40)) * (iv.log(2) + t1 - to_iv(Fraction(92, 3)) * iv.log(t1))) / (
            to_iv(Fraction(203, 22)) * iv.exp(to_iv(v.a_first) / 2))
        led.check(f"(2 N1/(log N1)^(92/3))^(3/40) / (203/22 e^(a/2)) < {v.first_bound} {tag}",
                  bound, "<", v.first_bound)
        led.check(f"{v.first_bound} < N0 {tag}", v.first_bound, "<", v.N0)
    # Later steps n = N_j, N = N_j^9, a = 7, for every j >= 1: check at N1, then monotonicity.
    led.check(f"scale ratio: 10^13 (x+1)^8 <= x^9 at x = N1 {tag}",
              13 * iv.log(10) + 8 * (t1 + iv.log(1 + iv.exp(-t1))), "<=", 9 * t1, note="log form")
    dom = _monotone_domain(t1)
    led.check(f"scale ratio: d/dt[9t - 8 log(e^t + 1)] > 0 beyond N1 {tag}",
              1 + 8 / (1 + iv.exp(dom)), ">", 0, note="monotone tail")
    c7 = iv.log(to_iv(Fraction(203, 22))) + to_iv(Fraction(7, 2))

    def g(t):
        return -iv.log(2) + to_iv(Fraction(40, 3)) * (c7 + t) - 9 * t + to_iv(Fraction(92, 3)) * iv.log(9 * t)

    led.check(f"scale ratio: x^9/(9 log x)^(92/3) < (1/2)(203/22 e^(7/2) x)^(40/3) at x = N1 {tag}", g(t1), ">", 0,
              note="log form")
    led.check(f"scale ratio: 40/3 - 9 + 92/(3t) > 0 beyond N1 {tag}",
              to_iv(Fraction(40, 3)) - 9 + to_iv(Fraction(92, 3)) / dom, ">", 0, note="monotone tail")
    led.check(f"N_j^9 < N_j^13 {tag}", 9, "<", 13)
    # 10 exp(-(log x)^1.5) <= x^(-20.7) for x >= 2.06e186.
    ts = iv.log(to_iv(Fraction(206, 100))) + 186 * iv.log(10)

    def h(t):
        return _pow(t, Fraction(3, 2)) - to_iv(Fraction(207, 10)) * t - iv.log(10)

    led.check(f"10 exp(-(log x)^(3/2)) <= x^(-20.7) at x = 2.06e186 {tag}", h(ts), ">=", 0, note="log form")
    led.check(f"(3/2) sqrt(t) - 20.7 > 0 beyond 2.06e186 {tag}",
              to_iv(Fraction(3, 2)) * iv.sqrt(_monotone_domain(ts)) - to_iv(Fraction(207, 10)), ">", 0,
              note="monotone tail")
    led.check(f"N1 >= 2.06e186 {tag}", t1, ">=", ts, note="log form")
    led.check(f"9 * 2.3 = 20.7 {tag}", 9 * Fraction(23, 10), "<=", Fraction(207, 10))
    # 5.5e4 x^(-3/40) (log x)^(53/10) <= threshold/20 for x >= 10^k.
    tl = v.ldt_log10 * iv.log(10)
    dev, _ = ldt_bounds(tl)
    target = v.threshold / 20
    led.check(f"5.5e4 x^(-3/40)(log x)^(53/10) <= {fmt(target)} at x = 10^{v.ldt_log10} {tag}",
              dev, "<=", iv.log(to_iv(target)), note="log form")
    led.check(f"-3/40 + 5.3/t < 0 beyond 10^{v.ldt_log10} {tag}",
              to_iv(Fraction(-3, 40)) + to_iv(Fraction(53, 10)) / _monotone_domain(tl), "<", 0,
              note="monotone tail")
    led.check(f"N1 >= 10^{v.ldt_log10} {tag}", t1, ">=", tl, note="log form")
    # Measure hypothesis bridge at the first step.
    if v.name == "main":
        led.check(f"N0^-21 = N1^(-7/3) {tag}", Fraction(v.power, 9), "<=", Fraction(7, 3))
        led.check(f"N1^(-7/3) <= N1^(-2.3) {tag}", Fraction(7, 3), ">=", Fraction(23, 10))
        led.check(f"N1 > 5e335 {tag}", t1, ">", iv.log(5) + 335 * iv.log(10), note="log form")
    else:
        led.check(f"N0^-{v.power} < N1^(-2.3) {tag}", -v.power * v.scale0.log(), "<",
                  -to_iv(Fraction(23, 10)) * t1, note="log form")
        led.check(f"N0 * threshold = 60 {tag}", v.N0 * v.threshold, ">=", 60)
    return led


def _first_term_ledger(v: Variant, led: Ledger) -> None:
    """Constant-only first-step terms at the threshold."""
    tag = f"[{v.name}]"
    if v.name == "main":
        led.check(f"1/N0 < (2/512) 1e-4 {tag}", Fraction(1, v.N0), "<", Fraction(2, 512) * Fraction(1, 10 ** 4))
        led.check(f"(5e335)^(-1.3) < 1e-4/(320 log 38) {tag}",
                  -to_iv(Fraction(13, 10)) * (iv.log(5) + 335 * iv.log(10)), "<",
                  iv.log(to_iv(Fraction(1, 10 ** 4)) / (320 * iv.log(38))), note="log form")
    else:
        small = Fraction(1, 10 ** 18) if v.name == "main2" else Fraction(1, 10 ** 17)
        led.check(f"(1/N0) e^(-30) < {fmt(small)} {tag}", iv.exp(-30) / v.N0, "<", small)
        led.check(f"{fmt(small)} < (2/512) threshold {tag}", small, "<", Fraction(2, 512) * v.threshold / 2)


def _tail_sums(v: Variant, L0, C3, led: Ledger, first_exponent) -> None:
    """Conditions (2), (3) of the scale lemma summed over all m, with geometric tails.

    N_{m+1} = N_m^9, so consecutive ratios are at most N1^-8 and N1^-10.4.
    """
    tag = f"[{v.name}]"
    t0, t1 = v.scale0.log(), v.N1.log()
    L0lo = _lo(to_iv(L0))
    q8 = iv.exp(-8 * t1)
    first = iv.exp(-t0 - first_exponent)
    rest = iv.exp(-to_iv(Fraction(7, 2)) - t1) / (1 - q8)
    led.check(f"(2) all j: sum (1/N_m) exp(-N_m L_m/2) < L_N0/512 {tag}", first + rest, "<", L0lo / 512,
              note="geometric tail, ratio <= N1^-8")
    p = to_iv(Fraction(-13, 10))
    q = iv.exp(to_iv(Fraction(-52, 5)) * t1)
    led.check(f"(3) all j: sum N_m^(-1.3) < L_N0/(1280 C3) {tag}", iv.exp(p * t1) / (1 - q), "<",
              L0lo / (1280 * _hi(to_iv(C3))), note="geometric tail, ratio <= N1^-10.4")


# -- theorems ------------------------------------------------------------------

@dataclass
class CertInputs:
    L_N0: object
    L_2N0: object
    B_N0: object
    B_2N0: object
    label: str = "unconditional-given-inputs"

    def __post_init__(self):
        for name in ("L_N0", "L_2N0", "B_N0", "B_2N0"):
            setattr(self, name, _interval_input(getattr(self, name)))
        for name in ("B_N0", "B_2N0"):
            lo, hi = endpoints(getattr(self, name))
            if lo < 0 or hi > 1:
                raise ValueError(f"{name} must lie in [0, 1]")

    @classmethod
    def at_threshold(cls, variant: str) -> "CertInputs":
        """Inputs sitting exactly on the variant's hypotheses."""
        v = get_variant(variant)
        B = Fraction(1, v.N0 ** v.power)
        return cls(v.threshold, v.threshold * Fraction(7, 8), B, B)

    @classmethod
    def from_stats(cls, stats: dict, k: float = 3.0) -> "CertInputs":
        """Widen sampled estimates by ``k`` standard errors; measures use the
        larger of the 95% upper bound and the point estimate plus ``k`` binomial
        standard errors."""
        M = stats["samples"]

        def widened(mean, se):
            return to_iv((float(mean) - k * float(se), float(mean) + k * float(se)))

        def measure(p, upper):
            se = (p * (1 - p) / M) ** 0.5
            return to_iv((0.0, min(1.0, max(float(upper), p + k * se))))

        return cls(
            widened(stats["L_N"], stats["stderr_L"]), widened(stats["L_2N"], stats["stderr_L2"]),
            measure(stats["B_N_measure"], stats.get("B_N_upper95", 1.0)),
            measure(stats["B_2N_measure"], stats.get("B_2N_upper95", 1.0)),
            label="statistical",
        )

    def to_dict(self):
        return {k: fmt(getattr(self, k)) for k in ("L_N0", "L_2N0", "B_N0", "B_2N0")}


@dataclass
class Certificate:
    variant: str
    inputs: CertInputs
    entries: list = field(default_factory=list)
    tail: list = field(default_factory=list)
    conclusion: object = None
    precision: int = 128
    scale_bounds: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        ledger = Ledger(self.entries)
        return ledger.verdict()

    def first_failure(self):
        return Ledger(self.entries).first_failure()

    def to_dict(self) -> dict:
        first = self.first_failure()
        return {
            "variant": self.variant,
            "label": self.inputs.label,
            "precision": self.precision,
            "inputs": self.inputs.to_dict(),
            "entries": [e.to_dict() for e in self.entries],
            "tail": [e.to_dict() for e in self.tail],
            "scale_bounds": [b.to_dict() for b in self.scale_bounds],
            "verdict": self.verdict,
            "first_failure": first.name if first else None,
            "conclusion": None if self.conclusion is None else {"L_lower": fmt(self.conclusion)},
        }


def _certify(v: Variant, inp: CertInputs, cert: Certificate, replay_scales: int) -> None:
    led = Ledger(cert.entries)
    tag = f"[{v.name}]"
    L0, L2 = inp.L_N0, inp.L_2N0
    Bmax = inp.B_N0 if endpoints(inp.B_N0)[1] >= endpoints(inp.B_2N0)[1] else inp.B_2N0
    if not isinstance(Bmax, Fraction):
        Bmax = _hi(Bmax)
    # Initial-scale hypotheses.
    initial = [
        led.check(f"(i) L_N0 >= {fmt(v.threshold)}", L0, ">=", v.threshold),
        led.check("(ii) L_N0 - L_2N0 <= L_N0/8",
                  Fraction(7, 8) * L0 if isinstance(L0, Fraction) else to_iv(Fraction(7, 8)) * L0, "<=", L2,
                  note="as (7/8) L_N0 <= L_2N0"),
        led.check(f"(iii) max(|B_N0|, |B_2N0|) <= N0^-{v.power}", Bmax, "<=", Fraction(1, v.N0 ** v.power)),
    ]
    if not all(e.passed for e in initial):
        return
    C3 = _hi(hull_constants()["U1"])
    # The scale lemma at j = 1 (and a short replay further out).
    first_exponent = _capped_exponent(v.scale0, L0)
    led.check(f"(1) N0 L_N0 >= 7 {tag}", _times(v.scale0, L0), ">=", 7)
    led.check(f"(2) j=1: (1/N0) exp(-N0 L_N0/2) < L_N0/512 {tag}",
              -v.scale0.log() - first_exponent, "<", iv.log(_lo(to_iv(L0)) / 512), note="log form")
    led.check(f"(3) j=1: N1^(-13/10) < L_N0/(1280 U1) {tag}", to_iv(Fraction(-13, 10)) * v.N1.log(), "<",
              iv.log(_lo(to_iv(L0)) / (1280 * C3)), note="log form")
    if v.name == "main":
        led.check(f"(4) bridge N0^-21 = N1^(-7/3) <= N1^(-2.3) {tag}", Fraction(7, 3), ">=", Fraction(23, 10))
    else:
        led.check(f"(4) bridge N0^-{v.power} < N1^(-2.3) {tag}", -v.power * v.scale0.log(), "<",
                  -to_iv(Fraction(23, 10)) * v.N1.log(), note="log form")
    bounds, seq = sequence_scheme(v.scales(replay_scales), L0, L2, C3)
    led.extend(seq)
    cert.scale_bounds = bounds
    if len(bounds) < 2 or not led.all_passed:
        return
    L1, L21 = bounds[1].L_N_lower, bounds[1].L_2N_lower
    # First large-deviation step: n = N0, N = N1.
    prop_led, ldt = ldt_step_check(v.scale0, v.N1, v.a_first, L0, L2, measure_hypothesis_ok=True)
    led.extend(prop_led)
    if ldt is None:
        return
    t1 = v.N1.log()
    led.check(f"10 exp(-(log N1)^(3/2)) <= N2^(-2.3) {tag}", ldt["N"][1], "<=",
              -to_iv(Fraction(23, 10)) * 9 * t1, note="log form")
    led.check(f"10 exp(-(log 2N1)^(3/2)) <= N2^(-2.3) {tag}", ldt["2N"][1], "<=",
              -to_iv(Fraction(23, 10)) * 9 * t1, note="log form")
    led.check(f"5.5e4 N1^(-3/40)(log N1)^(53/10) <= L_N0/20 {tag}", ldt["N"][0], "<=",
              iv.log(_lo(to_iv(L0)) / 20), note="log form")
    led.check(f"L_N0/20 <= min(L_N1, L_2N1)/10 {tag}", _lo(to_iv(L0)) / 20, "<=",
              iv.mpf(min(endpoints(L1)[0], endpoints(L21)[0])) / 10)
    # Every later step, uniformly in j.
    tail = Ledger()
    bookkeeping_ledger(tail)
    scales_lemma_check(v.name, tail)
    ldt_reductions(tail)
    _tail_sums(v, L0, C3, tail, first_exponent)
    dev, _ = ldt_bounds(v.ldt_log10 * iv.log(10))
    tail.check(f"5.5e4 x^(-3/40)(log x)^(53/10) <= L_N0/20 for x >= 10^{v.ldt_log10} {tag}",
               dev, "<=", iv.log(_lo(to_iv(L0)) / 20), note="log form")
    cert.tail = tail.entries
    bad = sum(1 for e in tail if not e.passed)
    status = tail.verdict()
    led.entries.append(LedgerEntry(
        f"tail: induction closes for every j >= 1 {tag}", bad, "<=", 0, status, -bad,
        note=f"{len(tail)} uniform inequalities, see 'tail'"))
    if led.all_passed:
        cert.conclusion = Fraction(1, 2) * L0 if isinstance(L0, Fraction) else _lo(to_iv(L0)) / 2


def certify_theorem(variant: str, inputs: CertInputs, prec: int = 128, replay_scales: int = 4) -> Certificate:
    """Replay a theorem's proof from initial-scale inputs.

    The conclusion ``L >= L_N0 / 2`` is attached only when every entry passes.
    """
    v = get_variant(variant)
    if prec < 64:
        raise ValueError("precision must be at least 64 bits")
    if replay_scales < 2:
        raise ValueError("replay_scales must be >= 2")
    cert = Certificate(v.name, inputs, precision=prec)
    with precision(prec):
        _certify(v, inputs, cert, replay_scales)
    return cert


def verify_paper(prec: int = 128) -> Ledger:
    """Every constant-only inequality behind the three theorems."""
    led = Ledger()
    with precision(prec):
        K.numeric_ledger(ledger=led)
        bookkeeping_ledger(led)
        ldt_reductions(led)
        for name, v in VARIANTS.items():
            scales_lemma_check(name, led)
            _first_term_ledger(v, led)
            C3 = _hi(hull_constants()["U1"])
            _tail_sums(v, v.threshold, C3, led, _capped_exponent(v.scale0, v.threshold))
            # The first large-deviation step at threshold inputs.
            ldt_step_check(v.scale0, v.N1, v.a_first, v.threshold, v.threshold * Fraction(7, 8), True, ledger=led)
    return led


__all__ = [
    "PASS", "FAIL", "INDETERMINATE", "PreconditionError", "LogScale", "DeviationParams", "Variant",
    "VARIANTS", "CertInputs", "Certificate", "induction_step", "sequence_scheme", "deviation_conditions",
    "ldt_step_check", "ldt_reductions", "scales_lemma_check", "bookkeeping_ledger", "certify_theorem",
    "verify_paper", "ldt_bounds", "hull_constants",
]
