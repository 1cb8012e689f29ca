"""Singular gaps, expansion rifts and projective angles for matrix chains, with
a checker for the hypotheses and conclusions of the effective Avalanche
Principle and a seeded fuzzer that builds admissible chains directly.

Products are built with norm renormalization and a separate log scale, so
chains of 100 strongly hyperbolic factors stay finite.  Singular vectors come
from ``numpy.linalg.svd`` (batched over leading axes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import check_int, check_matrix, check_scalar, check_vector


@dataclass(frozen=True)
class APParams:
    eps: float
    kappa: float

    def __post_init__(self):
        check_scalar(self.eps, "eps", min_val=0.0, max_val=0.1, include_boundaries="right")
        check_scalar(self.kappa, "kappa", min_val=0.0, include_boundaries="neither")
        if self.kappa > self.eps ** 2 / 10 * (1 + 1e-12):
            raise ValueError(f"kappa = {self.kappa} exceeds eps^2/10 = {self.eps ** 2 / 10}")


def oplus(a, b):
    return a + b - a * b


def _canonical(v):
    """Flip sign so the first coordinate that is not ~0 is positive."""
    v = np.array(v, dtype=np.float64)
    lead = np.argmax(np.abs(v) > 1e-300 + 1e-12 * np.max(np.abs(v), axis=-1, keepdims=True), axis=-1)
    sign = np.sign(np.take_along_axis(v, lead[..., None], axis=-1))
    sign[sign == 0] = 1.0
    return v * sign


def singular_values(g):
    return np.linalg.svd(check_matrix(g, "g"), compute_uv=False)


def gap_ratio(g):
    s = singular_values(g)
    if np.any(s[..., -1] <= 0) or np.any(s[..., 0] / s[..., -1] > 1e15):
        raise ValueError("g is singular (to working precision)")
    return s[..., 0] / s[..., 1]


def most_expanding(g):
    """Unit representative of the most expanding direction of g (first right singular vector)."""
    _, _, vh = np.linalg.svd(check_matrix(g, "g"))
    return _canonical(vh[..., 0, :])


def most_expanding_adjoint(g):
    """Most expanding direction of g*, i.e. the first left singular vector of g."""
    u, _, _ = np.linalg.svd(check_matrix(g, "g"))
    return _canonical(u[..., :, 0])


def alignment(x, y):
    """alpha = |cos angle(x, y)|."""
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    return min(1.0, abs(float(x @ y)) / (np.linalg.norm(x) * np.linalg.norm(y)))


def projective_distance(x, y):
    """delta = sin angle(x, y), computed from the orthogonal residual."""
    x = check_vector(x, "x")
    y = check_vector(y, "y")
    xh, yh = x / np.linalg.norm(x), y / np.linalg.norm(y)
    return min(1.0, float(np.linalg.norm(xh - (xh @ yh) * yh)))


def _log_product(chain):
    """(normalized product g_{n-1}...g_0, log of the scale removed)."""
    P = np.eye(chain[0].shape[0])
    log_scale = 0.0
    for g in chain:
        P = g @ P
        s = np.linalg.norm(P, 2)
        P /= s
        log_scale += math.log(s)
    return P, log_scale


def expansion_rift(chain) -> float:
    """||g_{n-1} ... g_0|| / (||g_{n-1}|| ... ||g_0||)."""
    chain = [check_matrix(g, "g") for g in chain]
    if not chain:
        raise ValueError("chain must be nonempty")
    _, log_prod = _log_product(chain)
    return math.exp(log_prod - sum(math.log(np.linalg.norm(g, 2)) for g in chain))


def log_rift(chain) -> float:
    _, log_prod = _log_product(chain)
    return log_prod - sum(math.log(np.linalg.norm(g, 2)) for g in chain)


def angles(g, g_next):
    """Lower and upper angles (alpha, beta) of the pair (g, g_next)."""
    gr1, gr2 = float(gap_ratio(g)), float(gap_ratio(g_next))
    if gr1 <= 1 or gr2 <= 1:
        raise ValueError("most expanding direction undefined when gr = 1")
    alpha = alignment(most_expanding_adjoint(g), most_expanding(g_next))
    beta = math.sqrt(oplus(oplus(gr1 ** -2, alpha ** 2), gr2 ** -2))
    return alpha, beta


def ap_verify(chain, params: APParams) -> dict:
    """Check (G), (A); if they hold, measure conclusions (i) and (ii) with margins."""
    chain = [check_matrix(g, "g") for g in chain]
    if not chain:
        raise ValueError("chain must be nonempty")
    eps, kappa = params.eps, params.kappa
    n = len(chain)
    grs = [float(gap_ratio(g)) for g in chain]
    for i, gr in enumerate(grs):
        if gr < 1 / kappa:
            return {"hypothesis": "G", "index": i, "passed": False, "violated": True}
    pair_logs = []
    for j in range(1, n):
        lr = log_rift([chain[j - 1], chain[j]])
        if lr < math.log(eps):
            return {"hypothesis": "A", "index": j, "passed": False, "violated": True}
        pair_logs.append(lr)
    P, _ = _log_product(chain)
    delta_right = projective_distance(most_expanding(P), most_expanding(chain[0]))
    delta_left = projective_distance(most_expanding_adjoint(P), most_expanding_adjoint(chain[-1]))
    bound_i = 3 * kappa / eps
    log_ratio = log_rift(chain) - sum(pair_logs)
    lo, hi = -5 * n * kappa / eps ** 2, 11 * n * kappa / eps ** 2
    s = np.linalg.svd(P, compute_uv=False)
    inv_gap = s[1] / s[0] if n > 1 else 1 / grs[0]
    ok_i = max(delta_right, delta_left) <= bound_i
    ok_ii = lo <= log_ratio <= hi
    return {
        "hypothesis": None, "violated": False, "n": n,
        "delta_right": delta_right, "delta_left": delta_left, "bound_i": bound_i,
        "log_ratio": log_ratio, "log_lower": lo, "log_upper": hi,
        "margin_i": bound_i - max(delta_right, delta_left),
        "margin_ii": min(log_ratio - lo, hi - log_ratio),
        "inverse_gap": float(inv_gap), "gap_bound": 20 * kappa / eps,
        "passed": ok_i and ok_ii,
    }


def alignment_bounds_check(g, x) -> dict:
    """alpha <= ||g x|| / (||g|| ||x||) <= sqrt(alpha^2 (+) gr(g)^-2) with alpha = alpha(x, v(g))."""
    g = check_matrix(g, "g")
    x = check_vector(x, "x")
    gr = float(gap_ratio(g))
    if gr <= 1:
        raise ValueError("gr(g) must exceed 1")
    alpha = alignment(x, most_expanding(g))
    ratio = np.linalg.norm(g @ x) / (np.linalg.norm(g, 2) * np.linalg.norm(x))
    upper = math.sqrt(oplus(alpha ** 2, gr ** -2))
    tol = 1e-12
    return {"alpha": alpha, "ratio": float(ratio), "upper": upper,
            "passed": bool(alpha <= ratio + tol and ratio <= upper + tol)}


def chain_angle_bounds(chain) -> dict:
    """prod alpha(g^j, g_j) <= rho(chain) <= prod beta(g^j, g_j), j = 1..n-1.

    Two-dimensional chains only: the gap of the running product is tracked as
    log gr = 2 log s1 - log|det|, which stays finite when the normalized
    product itself is numerically rank one.
    """
    chain = [check_matrix(g, "g") for g in chain]
    if chain[0].shape != (2, 2):
        raise ValueError("chain_angle_bounds supports 2x2 chains")
    log_a = log_b = 0.0
    P = chain[0] / np.linalg.norm(chain[0], 2)
    log_s1 = math.log(np.linalg.norm(chain[0], 2))
    log_det = math.log(abs(np.linalg.det(chain[0])))
    for g in chain[1:]:
        log_gr_prod = 2 * log_s1 - log_det
        alpha = alignment(most_expanding_adjoint(P), most_expanding(g))
        gr_next = float(gap_ratio(g))
        beta = math.sqrt(oplus(oplus(math.exp(-2 * log_gr_prod), alpha ** 2), gr_next ** -2))
        log_a += math.log(alpha) if alpha > 0 else -math.inf
        log_b += math.log(beta)
        P = g @ P
        nrm = np.linalg.norm(P, 2)
        P /= nrm
        log_s1 += math.log(nrm)
        log_det += math.log(abs(np.linalg.det(g)))
    lr = log_rift(chain)
    tol = 1e-9 * (1 + abs(lr))
    return {"log_lower": log_a, "log_rift": lr, "log_upper": log_b,
            "passed": log_a <= lr + tol and lr <= log_b + tol}


# -- fuzzing -------------------------------------------------------------------

def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _diag(s):
    z = np.zeros_like(s)
    return np.stack([np.stack([s, z], -1), np.stack([z, 1 / s], -1)], -2)


def admissible_factors(rng, shape, eps, kappa):
    """SL2 factors R(phi) diag(s, 1/s) R(psi) with s^2 >= 1/kappa and consecutive
    alignment |cos(phi_{i-1} + psi_i)| >= eps (which forces rho >= eps).

    ``shape`` is (trials, n); ``eps``/``kappa`` broadcast against (trials, 1).
    """
    trials, n = shape
    eps = np.broadcast_to(np.asarray(eps, float).reshape(-1, 1), (trials, 1))
    kappa = np.broadcast_to(np.asarray(kappa, float).reshape(-1, 1), (trials, 1))
    s = np.sqrt(1 / kappa * np.exp(rng.uniform(0, math.log(10), shape)))
    phi = rng.uniform(0, 2 * np.pi, shape)
    # Alignment angle: |cos| uniform in [eps', 1], with a share pinned at the edge.
    floor = eps * (1 + 1e-9)
    c = rng.uniform(floor, 1.0, shape)
    edge = rng.random(shape) < 0.3
    c = np.where(edge, np.broadcast_to(floor, shape), c)
    theta = np.arccos(c) * rng.choice([-1.0, 1.0], shape) + rng.choice([0.0, np.pi], shape)
    psi = np.empty(shape)
    psi[:, 0] = rng.uniform(0, 2 * np.pi, trials)
    psi[:, 1:] = theta[:, 1:] - phi[:, :-1]
    return _rotation(phi) @ _diag(s) @ _rotation(psi)


def ap_fuzz(trials=10_000, n_max=100, seed=1) -> dict:
    """Batched fuzz of the Avalanche Principle conclusions on admissible SL2 chains."""
    check_int(trials, "trials", min_val=1)
    check_int(n_max, "n_max", min_val=1)
    rng = np.random.default_rng(seed)
    eps = rng.uniform(0.005, 0.1, trials)
    kappa = eps ** 2 / 10 * np.exp(-rng.uniform(0, math.log(1e4), trials))
    n = rng.integers(1, n_max + 1, trials)
    g = admissible_factors(rng, (trials, n_max), eps, kappa)
    active = np.arange(n_max)[None, :] < n[:, None]

    s = np.linalg.svd(g, compute_uv=False)
    log_norms = np.log(s[..., 0])
    gr = s[..., 0] / s[..., 1]
    g_ok = np.all((gr >= 1 / kappa[:, None]) | ~active, axis=1)

    pair = g[:, 1:] @ g[:, :-1]
    pair_log_rift = np.log(np.linalg.norm(pair, 2, axis=(-2, -1))) - log_norms[:, 1:] - log_norms[:, :-1]
    pair_active = active[:, 1:]
    a_ok = np.all((pair_log_rift >= np.log(eps)[:, None]) | ~pair_active, axis=1)

    P = np.broadcast_to(np.eye(2), (trials, 2, 2)).copy()
    log_scale = np.zeros(trials)
    final = np.empty((trials, 2, 2))
    final_log = np.empty(trials)
    for j in range(n_max):
        P = g[:, j] @ P
        nrm = np.linalg.norm(P, 2, axis=(-2, -1))
        P /= nrm[:, None, None]
        log_scale += np.log(nrm)
        done = n == j + 1
        final[done] = P[done]
        final_log[done] = log_scale[done]

    u, sv, vh = np.linalg.svd(final)
    _, _, vh0 = np.linalg.svd(g[:, 0])
    last = g[np.arange(trials), n - 1]
    u_last, _, _ = np.linalg.svd(last)

    def sin_angle(x, y):
        cos = np.abs(np.sum(x * y, axis=-1))
        return np.sqrt(np.clip(1 - cos ** 2, 0, None))

    delta_right = sin_angle(vh[:, 0, :], vh0[:, 0, :])
    delta_left = sin_angle(u[:, :, 0], u_last[:, :, 0])
    bound_i = 3 * kappa / eps
    log_ratio = (final_log - np.sum(np.where(active, log_norms, 0), axis=1)
                 - np.sum(np.where(pair_active, pair_log_rift, 0), axis=1))
    lo, hi = -5 * n * kappa / eps ** 2, 11 * n * kappa / eps ** 2
    admissible = g_ok & a_ok
    viol_i = admissible & (np.maximum(delta_right, delta_left) > bound_i)
    viol_ii = admissible & ((log_ratio < lo) | (log_ratio > hi))
    inv_gap = np.where(n > 1, sv[:, 1] / sv[:, 0], 1 / gr[:, 0])
    viol_gap = admissible & (inv_gap > 20 * kappa / eps)
    rel_i = np.maximum(delta_right, delta_left) / bound_i
    rel_ii = np.maximum(log_ratio / hi, log_ratio / lo)
    return {
        "trials": trials, "n_max": n_max, "seed": seed,
        "admissible": int(admissible.sum()),
        "violations_i": int(viol_i.sum()), "violations_ii": int(viol_ii.sum()),
        "violations_gap": int(viol_gap.sum()),
        "worst_fraction_of_bound_i": float(rel_i[admissible].max(initial=0.0)),
        "worst_fraction_of_bound_ii": float(rel_ii[admissible].max(initial=0.0)),
        "passed": bool(admissible.all() and not viol_i.any() and not viol_ii.any() and not viol_gap.any()),
    }


def pair_fuzz(trials=10_000, seed=1) -> dict:
    """alpha(g, g') <= rho(g, g') <= beta(g, g') on random SL2 pairs with gr > 1."""
    rng = np.random.default_rng(seed)
    s = np.exp(rng.uniform(0.01, 5.0, (trials, 2)))
    g = _rotation(rng.uniform(0, 2 * np.pi, (trials, 2))) @ _diag(s) @ _rotation(
        rng.uniform(0, 2 * np.pi, (trials, 2)))
    a, b = g[:, 0], g[:, 1]
    ua, sa, _ = np.linalg.svd(a)
    _, sb, vhb = np.linalg.svd(b)
    alpha = np.abs(np.sum(ua[:, :, 0] * vhb[:, 0, :], axis=-1))
    gra, grb = sa[:, 0] / sa[:, 1], sb[:, 0] / sb[:, 1]
    beta = np.sqrt(oplus(oplus(gra ** -2, alpha ** 2), grb ** -2))
    rho = np.linalg.norm(b @ a, 2, axis=(-2, -1)) / (sa[:, 0] * sb[:, 0])
    tol = 1e-12
    bad = (alpha > rho + tol) | (rho > beta + tol)
    return {"trials": trials, "violations": int(bad.sum()),
            "min_rho_minus_alpha": float(np.min(rho - alpha)),
            "min_beta_minus_rho": float(np.min(beta - rho)),
            "passed": not bad.any()}
