import math
import random

import mpmath
import numpy as np
import pytest

from skewlyap import cocycle as C

PARAMS = C.CocycleParams(0.5, 0.3)


def _phases(count, seed=11):
    rng = random.Random(seed)
    return [(rng.getrandbits(128), rng.getrandbits(128)) for _ in range(count)]


@pytest.mark.parametrize("n", [1, 5, 12])
def test_product_matches_extended_precision(n):
    for x, y in _phases(100):
        P = C.transfer_product(PARAMS, x, y, n)
        Q = C.transfer_product_mp(PARAMS, x, y, n, dps=34)
        scale = math.exp(P.log_scale)
        ref = np.array(Q.tolist(), dtype=float)
        assert np.allclose(P.array() * scale, ref, rtol=1e-10, atol=1e-10 * np.abs(ref).max())


def test_u_n_at_1000_matches_extended_precision():
    for x, y in _phases(5):
        u = C.u_n(PARAMS, x, y, 1000)
        ref = float(C.log_norm_mp(C.transfer_product_mp(PARAMS, x, y, 1000, dps=34), dps=34)) / 1000
        assert u == pytest.approx(ref, rel=1e-8)


def test_cocycle_identity():
    for x, y in _phases(20):
        n, m = 37, 55
        left = C.transfer_product(PARAMS, x, y, n + m)
        xs, ys = C.skew_orbit(x, y, n)
        right = C.transfer_product(PARAMS, xs, ys, m) @ C.transfer_product(PARAMS, x, y, n)
        assert left.log_norm() == pytest.approx(right.log_norm(), rel=1e-9)
        a = left.array() / np.abs(left.array()).max()
        b = right.array() / np.abs(right.array()).max()
        assert np.allclose(a, b, atol=1e-9)


def test_determinant_is_one():
    x, y = _phases(1)[0]
    P = C.transfer_product_mp(PARAMS, x, y, 50, dps=60)
    with mpmath.workdps(60):
        assert abs(mpmath.det(P) - 1) < mpmath.mpf(10) ** -40


@pytest.mark.parametrize("n", [1000, 100_000])
def test_orbit_closed_form_bit_exact(n):
    for x, y in _phases(3):
        assert C.skew_orbit(x, y, n) == C.skew_orbit_closed(x, y, n)


def test_regularized_form_at_zero():
    w = complex(math.cos(1.0), math.sin(1.0))
    for lam in (0.5, 0.75, 1.0):
        assert C.v_n(lam, 0.2, 0j, w, 40) == pytest.approx(math.log(lam), abs=1e-12)


def test_regularized_form_matches_on_torus():
    for x, y in _phases(5):
        assert C.u_n_from_norms(0.5, 0.3, x, y, 30) == pytest.approx(C.u_n(PARAMS, x, y, 30), rel=1e-9)


def test_batch_matches_scalar():
    ph = _phases(64)
    xh, xl = C.split_limbs([p[0] for p in ph])
    yh, yl = C.split_limbs([p[1] for p in ph])
    out = C.batch_log_norms(PARAMS, xh, xl, yh, yl, [10, 200])
    for i, (x, y) in enumerate(ph):
        assert out[200][i] == pytest.approx(C.transfer_product(PARAMS, x, y, 200).log_norm(), rel=1e-10)
        assert out[10][i] == pytest.approx(C.transfer_product(PARAMS, x, y, 10).log_norm(), rel=1e-10)


def test_parameter_validation():
    with pytest.raises(ValueError):
        C.CocycleParams(0.4, 0.0)
    with pytest.raises(ValueError):
        C.CocycleParams(0.5, 3.5)
    with pytest.raises(ValueError):
        C.transfer_product(PARAMS, 0, 0, -1)


def test_golden_ratio_frac():
    assert C.frac_to_float(C.OMEGA) == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-16)
