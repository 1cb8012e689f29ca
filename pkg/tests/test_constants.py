from fractions import Fraction

import pytest

from skewlyap import constants as K
from skewlyap.ledger import PASS, endpoints, precision


def test_ledger_passes_at_default_radii():
    led = K.numeric_ledger()
    assert len(led) >= 20
    bad = [e.name for e in led if e.verdict != PASS]
    assert not bad, bad
    for e in led:
        # non-strict relations may hold with equality (U(1,1) = log(38)/2)
        if e.rel in ("<", ">"):
            assert e.margin_lower() > 0, e.name
        else:
            assert e.margin_lower() >= 0, e.name


def test_interval_and_float_tables_agree():
    f = K.constants_table(interval=False).as_dict()
    with precision():
        g = K.constants_table(interval=True).as_dict()
    for name, x in f.items():
        lo, hi = endpoints(g[name])
        assert float(lo) - 1e-12 * abs(x) <= x <= float(hi) + 1e-12 * abs(x), name


def test_radii_must_be_ordered():
    with pytest.raises(ValueError):
        K.Radii(3, 4, 2)
    with pytest.raises(ValueError):
        K.Radii(4, 3, 1)


def test_c4_c5_brackets():
    with precision():
        lo4, hi4 = endpoints(K.c4())
        lo5, _ = endpoints(K.c5())
    assert 46 < lo4 and hi4 < 47
    assert lo5 > 270


def test_lambda_hull_contains_endpoints():
    with precision():
        hull = K.over_lambda(lambda lam: K.u_lambda(lam, 1, True))
        lo, hi = endpoints(hull)
        for lam in (Fraction(1, 2), Fraction(3, 4), Fraction(1)):
            a, b = endpoints(K.u_lambda(lam, 1, True))
            assert lo <= a and b <= hi


def test_split_exponent():
    assert K.split_exponent(Fraction(1, 8)) == Fraction(3, 4) / Fraction(13, 2)
