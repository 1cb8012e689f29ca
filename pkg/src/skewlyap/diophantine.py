"""Diophantine facts about the golden rotation and the exponential sums built
on them: torus norms, continued fractions, linear and quadratic-phase sums and
the divisor-count bounds that control their overcounting.

Phases are reduced exactly as 128-bit fractions (or, for long vectorized
ranges, as products mod 2**64 of the top 64 bits of omega, whose error is at
most l * 2**-64) before any floating-point exponential is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cocycle import MASK, OMEGA, ONE
from .validation import check_int, check_scalar

_OMEGA_TOP = np.uint64(OMEGA >> 64)
_TWO_PI = 2.0 * math.pi
S2_S3_CAP = 10 ** 8
SIEVE_CAP = 10 ** 9


def torus_norm(k: int, omega: int = OMEGA) -> float:
    """||k omega||_T computed exactly, then rounded to a double."""
    if k == 0:
        raise ValueError("k must be nonzero")
    v = (k * omega) & MASK
    return min(v, ONE - v) / ONE


def torus_norms(count: int) -> np.ndarray:
    """||l omega||_T for l = 1..count from the top 64 bits of omega (vectorized)."""
    ell = np.arange(1, count + 1, dtype=np.uint64)
    frac = (ell * _OMEGA_TOP).astype(np.float64) * 2.0 ** -64
    return np.minimum(frac, 1.0 - frac)


def check_three_k_bound(kmax: int, omega: int = OMEGA) -> dict:
    """Exact integer check of ||k omega|| >= 1/(3k) for 1 <= k <= kmax."""
    check_int(kmax, "kmax", min_val=1)
    worst_k, worst = None, math.inf
    v = 0
    for k in range(1, kmax + 1):
        v = (v + omega) & MASK
        dist = v if v < ONE - v else ONE - v
        # 3 k dist / 2**128 is the ratio of the two sides.
        ratio = 3 * k * dist
        if ratio < worst:
            worst, worst_k = ratio, k
    return {"kmax": kmax, "worst_k": worst_k, "worst_ratio": worst / ONE, "passed": worst >= ONE}


@dataclass
class ContinuedFraction:
    partial_quotients: list
    convergents: list = field(default_factory=list)


def continued_fraction(numerator: int, denominator: int = ONE, depth: int = 50) -> ContinuedFraction:
    """Partial quotients a_1..a_depth of numerator/denominator in (0, 1), with convergents."""
    check_int(depth, "depth", min_val=1)
    if not 0 < numerator < denominator:
        raise ValueError("need 0 < numerator < denominator")
    quotients = []
    p, q = numerator, denominator
    while p and len(quotients) < depth:
        a, r = divmod(q, p)
        quotients.append(a)
        q, p = p, r
    convergents = []
    p_prev, p_cur = 1, 0
    q_prev, q_cur = 0, 1
    for a in quotients:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        convergents.append((p_cur, q_cur))
    return ContinuedFraction(quotients, convergents)


def gold_separation(sigma: float) -> dict:
    """All l <= ceil(10/sigma) with ||l omega|| <= sigma: their minimum and spacing."""
    check_scalar(sigma, "sigma", min_val=0.0, max_val=0.5, include_boundaries="neither")
    limit = math.ceil(10 / sigma)
    hits = [l for l in range(1, limit + 1) if torus_norm(l) <= sigma]
    smallest = hits[0] if hits else None
    gap = min((b - a for a, b in zip(hits, hits[1:])), default=None)
    ok_min = smallest is None or smallest >= 1 / (3 * sigma)
    ok_gap = gap is None or gap >= 1 / (6 * sigma)
    return {"sigma": sigma, "hits": len(hits), "smallest": smallest, "min_gap": gap,
            "passed": ok_min and ok_gap}


def _dirichlet_abs(theta_num: int, denom_bits: int, R: int) -> float:
    """|sum_{k=1}^R e(k theta)| for theta = theta_num / 2**denom_bits, exactly reduced."""
    one = 1 << denom_bits
    t = theta_num & (one - 1)
    if t == 0:
        return float(R)
    rt = (R * t) & (one - 1)
    return abs(math.sin(math.pi * (rt / one)) / math.sin(math.pi * (t / one)))


def exp_sum(ell: int, R: int, half: bool = False, omega: int = OMEGA) -> dict:
    """|sum_{k=1}^R e(k l omega)| (or e(k l omega / 2)) against its min-bound."""
    check_int(R, "R", min_val=1)
    if half:
        value = _dirichlet_abs(ell * omega, 129, R)
    else:
        value = _dirichlet_abs(ell * omega, 128, R)
    norm = torus_norm(ell, omega) if ell else 0.0
    if norm == 0:
        bound = float(R)
    elif half:
        bound = min(R, 1 / norm)
    else:
        bound = min(R, 1 / (2 * norm))
    return {"ell": ell, "R": R, "half": half, "value": value, "bound": bound,
            "passed": value <= bound * (1 + 1e-12)}


def weyl_S1(K: int, p2: int) -> dict:
    """S1 = (1/K) sum_{1<=|l|<=p2} |sum_{k<=K} e(l k omega)| / |l| against 26 (ln K / K) ln p2."""
    check_int(K, "K", min_val=38)
    check_int(p2, "p2", min_val=1)
    if p2 < K:
        raise ValueError(f"need p2 >= K, got p2={p2}, K={K}")
    ell = np.arange(1, p2 + 1, dtype=np.uint64)
    t = ell * _OMEGA_TOP
    kt = t * np.uint64(K)
    theta = t.astype(np.float64) * 2.0 ** -64
    ktheta = kt.astype(np.float64) * 2.0 ** -64
    mags = np.abs(np.sin(np.pi * ktheta) / np.sin(np.pi * theta))
    measured = 2.0 / K * float(np.sum(mags / ell.astype(np.float64)))
    bound = 26 * math.log(K) / K * math.log(p2)
    return {"K": K, "p2": p2, "measured": measured, "bound": bound, "slack": bound / measured,
            "passed": measured <= bound}


def quadratic_phases(y: int, K: int, omega: int = OMEGA) -> list:
    """k y + k(k-1)/2 omega mod 1 for k = 1..K, as exact 128-bit fractions."""
    return [(k * y + (k * (k - 1) // 2) * omega) & MASK for k in range(1, K + 1)]


def _top_limbs(values) -> np.ndarray:
    return np.array([(v & MASK) >> 64 for v in values], dtype=np.uint64)


@lru_cache(maxsize=4)
def _linear_phase_matrix(K: int, p2: int, omega: int = OMEGA) -> np.ndarray:
    """e(l2 k omega) for l2 = -p2..p2 (rows) and k = 1..K (columns)."""
    k_omega = _top_limbs([k * omega for k in range(1, K + 1)])
    l2 = np.arange(-p2, p2 + 1).astype(np.int64).astype(np.uint64)  # wraps negatives mod 2**64
    with np.errstate(over="ignore"):
        frac = np.multiply.outer(l2, k_omega)
    return np.exp(1j * _TWO_PI * (frac.astype(np.float64) * 2.0 ** -64))


def _weyl_inner(y: int, K: int, p1: int, p2: int, omega: int = OMEGA):
    """|sum_k e(l1 phi_k + l2 k omega)| for 1<=|l1|<=p1 and |l2|<=p2, as a (2 p1, 2 p2 + 1) array.

    Products l * phase are formed mod 2**64 on the top 64 bits of each exact
    phase, an error of at most |l| * 2**-64.
    """
    phi = _top_limbs(quadratic_phases(y, K, omega))
    l1 = np.array([l for l in range(-p1, p1 + 1) if l], dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        frac = np.multiply.outer(l1, phi)
    A = np.exp(1j * _TWO_PI * (frac.astype(np.float64) * 2.0 ** -64))
    B = _linear_phase_matrix(K, p2, omega)
    return np.abs(A @ B.T), np.arange(-p2, p2 + 1)


def divisor_counts(m: int) -> np.ndarray:
    """tau(n) for n = 0..m (tau(0) set to 0) by a divisor-pair sieve."""
    check_int(m, "m", min_val=1)
    if m > SIEVE_CAP:
        raise MemoryError(f"divisor sieve capped at {SIEVE_CAP}, got {m}")
    tau = np.zeros(m + 1, dtype=np.int32)
    for d in range(1, math.isqrt(m) + 1):
        tau[d * d] += 1
        tau[d * (d + 1)::d] += 2
    return tau


def divisor_max(m: int) -> int:
    """tau*(m) = max_{n <= m} tau(n)."""
    check_int(m, "m", min_val=2)
    return int(divisor_counts(m).max())


def overcount_constant(p1: int, K: int) -> int:
    """C*_{p1 K} taken as min(p1, tau*(p1 K))."""
    if p1 == 0:
        return 0
    return min(p1, divisor_max(max(p1 * K, 2)))


def weyl_S2_S3(K: int, p1: int, p2: int, y: int, omega: int = OMEGA,
               c_star: int | None = None) -> dict:
    check_int(K, "K", min_val=38)
    check_int(p1, "p1", min_val=0)
    check_int(p2, "p2", min_val=1)
    if p1 * K > S2_S3_CAP:
        raise ValueError(f"p1 K = {p1 * K} exceeds the cap {S2_S3_CAP}")
    if p1 == 0:
        return {"K": K, "p1": 0, "p2": p2, "measuredS2": 0.0, "boundS2": 0.0,
                "measuredS3": 0.0, "boundS3": 0.0, "passed": True}
    sums, l2 = _weyl_inner(y, K, p1, p2, omega)
    col0 = int(np.nonzero(l2 == 0)[0][0])
    measured_s2 = 2.0 / K * math.sqrt(float(np.sum(sums[:, col0] ** 2)))
    nonzero = l2 != 0
    per_l2 = np.sqrt(np.sum(sums[:, nonzero] ** 2, axis=0)) / np.abs(l2[nonzero])
    measured_s3 = float(np.sum(per_l2)) / K
    if c_star is None:
        c_star = overcount_constant(p1, K)
    common = math.sqrt(c_star * p1 / K * math.log(K))
    bound_s2 = 20 * common
    bound_s3 = 25 * math.log(p2) * common
    return {"K": K, "p1": p1, "p2": p2, "c_star": c_star,
            "measuredS2": measured_s2, "boundS2": bound_s2,
            "measuredS3": measured_s3, "boundS3": bound_s3,
            "passed": measured_s2 < bound_s2 and measured_s3 < bound_s3}


def weyl_S4_S5(K: int, p1: int) -> dict:
    """Counting sums that bound sum_{l <= p1 K} min(1, 1/(2K ||l omega||))."""
    check_int(K, "K", min_val=1)
    check_int(p1, "p1", min_val=1)
    norms = torus_norms(p1 * K)
    s4 = int(np.sum(norms < 1 / (2 * K)))
    s5 = 0.0
    j = 1
    while 2 ** j < 2 * K:
        band = (norms >= 2 ** (j - 1) / (2 * K)) & (norms < 2 ** j / (2 * K))
        s5 += int(np.sum(band)) / 2 ** (j - 1)
        j += 1
    b4, b5 = 3 * p1, 6 * (math.log2(K) + 1) * p1
    return {"K": K, "p1": p1, "S4": s4, "boundS4": b4, "S5": s5, "boundS5": b5,
            "passed": s4 <= b4 and s5 <= b5}


def divisor_bounds(m: int) -> dict:
    """Check the divisor-count bounds for every m' <= m (from m' = 3 for the lnln form)."""
    check_int(m, "m", min_val=3)
    running = np.maximum.accumulate(divisor_counts(m))
    worst = {"lnln": math.inf, "half": math.inf, "eighth": math.inf, "fiftieth": math.inf}
    chunk = 1 << 20
    for start in range(3, m + 1, chunk):
        n = np.arange(start, min(start + chunk, m + 1), dtype=np.float64)
        t = running[start:start + len(n)].astype(np.float64)
        logn = np.log(n)
        worst["lnln"] = min(worst["lnln"], float(np.min(1.06602 * logn / np.log(logn) - np.log(t))))
        worst["half"] = min(worst["half"], float(np.min(np.log(2) + 0.5 * logn - np.log(t))))
        worst["eighth"] = min(worst["eighth"], float(np.min(np.log(42000) + logn / 8 - np.log(t))))
        keep = n <= 327680000
        if np.any(keep):
            worst["fiftieth"] = min(worst["fiftieth"], float(
                np.min(np.log(702) + logn[keep] / 50 - np.log(t[keep]))))
    # tau*(2) = 2 is within every power bound with a constant >= 2.
    return {"m": m, "tau_star": int(running[m]), "log_margins": worst,
            "passed": all(v >= 0 for v in worst.values())}


def sin_halfangle_bound(thetas) -> dict:
    """|sin(pi theta / 2)| >= ||theta||_T on the supplied reals."""
    th = np.asarray(thetas, dtype=np.float64)
    lhs = np.abs(np.sin(np.pi * th / 2))
    rhs = np.abs(th - np.round(th))
    slack = 4 * np.finfo(float).eps * (np.abs(th) + 1)
    margin = lhs - rhs + slack
    return {"count": int(th.size), "worst_margin": float(np.min(lhs - rhs)),
            "passed": bool(np.all(margin >= 0))}
