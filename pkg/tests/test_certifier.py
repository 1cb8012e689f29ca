import random
from fractions import Fraction

import pytest
from mpmath import iv, mp

from skewlyap import certifier as Cz
from skewlyap.ledger import FAIL, PASS, endpoints, is_interval, precision, to_iv


@pytest.fixture(scope="module")
def ledger128():
    return Cz.verify_paper(128)


def test_constant_ledger_passes(ledger128):
    assert len(ledger128) >= 20
    assert ledger128.verdict() == PASS, ledger128.first_failure()


def test_soundness_against_higher_precision(ledger128):
    """A 256-bit rerun gives the same verdicts; on a 10% subsample its
    enclosures overlap the 128-bit ones and exact entries agree with Fraction
    comparison."""
    hi = Cz.verify_paper(256)
    assert [e.verdict for e in hi] == [e.verdict for e in ledger128]
    rng = random.Random(0)
    sample = rng.sample(range(len(hi)), max(1, len(hi) // 10))
    ops = {"<": lambda a, b: a < b, "<=": lambda a, b: a <= b, ">": lambda a, b: a > b,
           ">=": lambda a, b: a >= b}
    for i in sample:
        a, b = ledger128.entries[i], hi.entries[i]
        for x, y in ((a.lhs, b.lhs), (a.rhs, b.rhs)):
            if is_interval(x) or is_interval(y):
                xl, xh = endpoints(x)
                yl, yh = endpoints(y)
                assert yl <= xh and xl <= yh, a.name
            else:
                assert Fraction(x) == Fraction(y)
        if not is_interval(a.lhs) and not is_interval(a.rhs):
            truth = ops[a.rel](Fraction(a.lhs), Fraction(a.rhs))
            assert (a.verdict == PASS) == truth, a.name


def _direct_deviation_conditions(n, N, L, c, params):
    """Conditions (I)-(IV) and (VI) evaluated without logarithms."""
    d, d2, d3 = to_iv(params.delta), to_iv(params.delta2), to_iv(params.delta3)
    Nv, nv = iv.mpf(N), iv.mpf(n)
    lnN = iv.log(Nv)
    C2 = to_iv(params.C2)
    out = {
        "(I)": (c["C"] * ((2 * nv + 1) * c["logR"] + c["K"]), "<=", Nv ** d),
        "(II)": (Nv, ">=", iv.mpf(38)),
        "(III)": (iv.exp(4 * lnN ** d2), ">=", Nv + 1),
        "(IV)": (21 * Nv ** (iv.mpf(-9) / 10 + iv.mpf(9) / 5 * d) * lnN ** (iv.mpf(9) / 10 + iv.mpf(9) / 5 * d2)
                 + 4 * c["C"] * c["B4m4"], "<=", Nv ** d * lnN ** d2),
        "(VI)": (22 / nv * iv.exp(-nv * to_iv(L) / 2), "<",
                 C2 * Nv ** (iv.mpf(-1) / 10 + d / 5) * lnN ** (iv.mpf(1) / 10 + d2 / 5 + d3)),
    }
    return out


def _decided(lhs, rel, rhs):
    (a, b), (c, d) = endpoints(lhs), endpoints(rhs)
    if rel in ("<", "<="):
        return True if b < c else False if a > d else None
    return True if a > d else False if b < c else None


def test_log_form_matches_direct_evaluation():
    rng = random.Random(1)
    params = Cz.DEFAULT_PARAMS
    c = Cz.hull_constants()
    compared, seen = 0, set()
    with precision(128):
        for _ in range(1000):
            n = max(2, int(10 ** rng.uniform(0.3, 4)))
            N = n * max(2, int(10 ** rng.uniform(0.3, 6)))
            L = Fraction(rng.randint(1, 10 ** 4), 10 ** 4)
            led = Cz.deviation_conditions(n, Cz.LogScale(N), L, L * Fraction(7, 8), params, c)
            direct = _direct_deviation_conditions(n, N, L, c, params)
            for e in led:
                key = e.name.split(" ")[0]
                if key not in direct:
                    continue
                want = _decided(*direct[key])
                if want is None or e.verdict not in (PASS, FAIL):
                    continue
                assert (e.verdict == PASS) == want, (key, n, N, L)
                compared += 1
                seen.add((key, want))
    assert compared > 3000
    assert {("(II)", False), ("(II)", True), ("(IV)", False), ("(IV)", True)} <= seen


def test_e_term_matches_direct():
    rng = random.Random(2)
    with precision(128):
        for _ in range(1000):
            n = rng.randint(1, 5000)
            L = Fraction(rng.randint(1, 1000), 1000)
            got = Cz._e_term(Cz.LogScale(n) if n >= 2 else Cz.LogScale(2), L, 11)
            n_eff = max(n, 2)
            mp.prec = 128
            want = 11 / mp.mpf(n_eff) * mp.exp(-mp.mpf(n_eff) * mp.mpf(L.numerator) / L.denominator / 2)
            lo, hi = endpoints(got)
            assert lo <= want * (1 + mp.mpf(2) ** -100) and want <= hi * (1 + mp.mpf(2) ** -100)


def test_logscale_value_and_divides():
    s = Cz.LogScale(10, 3)
    assert s.exact() == 1000
    assert Cz.divides(Cz.LogScale(10), s) is True
    assert Cz.divides(Cz.LogScale(7), Cz.LogScale(10)) is False
    big = Cz.LogScale(3 * 10 ** 320, 81)
    assert big.exact() is None
    assert Cz.divides(Cz.LogScale(3 * 10 ** 320), big) is True
    with pytest.raises(ValueError):
        Cz.LogScale(1)


def test_induction_step_preconditions():
    with pytest.raises(Cz.PreconditionError) as err:
        Cz.induction_step(1000, 10 ** 6, Fraction(1, 1000), Fraction(1, 1000), 3)
    assert err.value.name.startswith("(a)")
    with pytest.raises(Cz.PreconditionError) as err:
        Cz.induction_step(1000, 10 ** 6, Fraction(1, 10), Fraction(1, 20), 3)
    assert err.value.name.startswith("(b)")
    with pytest.raises(Cz.PreconditionError):
        Cz.induction_step(1000, 10 ** 6 + 1, Fraction(1, 10), Fraction(1, 10), 3)


def test_induction_step_bounds_are_ordered():
    low, diff = Cz.induction_step(10 ** 4, 10 ** 8, Fraction(1, 10), Fraction(95, 1000), 3)
    low, diff = (endpoints(x)[0] for x in (low, diff))
    assert 0 < low < 0.1
    assert diff >= 0


def test_bookkeeping():
    assert Cz.bookkeeping_ledger().verdict() == PASS


@pytest.mark.parametrize("variant,conclusion", [("main", Fraction(1, 10 ** 4)),
                                                ("main2", Fraction(1, 10 ** 4)),
                                                ("main3", Fraction(1, 10 ** 3))])
def test_threshold_certificates(variant, conclusion):
    cert = Cz.certify_theorem(variant, Cz.CertInputs.at_threshold(variant))
    assert cert.verdict == PASS, cert.first_failure()
    assert cert.conclusion >= conclusion
    assert cert.tail


def _perturbed(variant, L_scale=1, diff_scale=1, B_scale=1):
    v = Cz.get_variant(variant)
    L = v.threshold * Fraction(L_scale)
    L2 = L - L / 8 * Fraction(diff_scale)
    B = min(Fraction(1), Fraction(1, v.N0 ** v.power) * B_scale)
    return Cz.CertInputs(L, L2, B, B)


@pytest.mark.parametrize("kw,prefix", [({"L_scale": Fraction(9, 10)}, "(i)"),
                                       ({"diff_scale": Fraction(6, 5)}, "(ii)"),
                                       ({"B_scale": 3 * 10 ** 4}, "(iii)")])
def test_single_perturbation_fails_at_that_entry(kw, prefix):
    cert = Cz.certify_theorem("main3", _perturbed("main3", **kw))
    assert cert.verdict == FAIL
    assert cert.first_failure().name.startswith(prefix)
    assert cert.conclusion is None


def test_monotone_in_inputs():
    """Lowering L_N0 or raising the measures never turns a failure into a pass."""
    scales = [Fraction(6, 5), Fraction(1), Fraction(19, 20), Fraction(9, 10), Fraction(1, 2)]
    verdicts = [Cz.certify_theorem("main3", _perturbed("main3", L_scale=s)).verdict for s in scales]
    first_fail = verdicts.index(FAIL)
    assert all(v == FAIL for v in verdicts[first_fail:])
    verdicts = [Cz.certify_theorem("main3", _perturbed("main3", B_scale=b)).verdict
                for b in (Fraction(1, 10), 1, 10, 10 ** 6)]
    first_fail = verdicts.index(FAIL)
    assert all(v == FAIL for v in verdicts[first_fail:])


def test_certificate_is_deterministic():
    inp = Cz.CertInputs.at_threshold("main2")
    a = Cz.certify_theorem("main2", inp).to_dict()
    b = Cz.certify_theorem("main2", inp).to_dict()
    assert a == b


def test_statistical_inputs_are_labelled():
    stats = {"samples": 10 ** 4, "L_N": 0.08, "stderr_L": 1e-5, "L_2N": 0.079, "stderr_L2": 1e-5,
             "B_N_measure": 0.0, "B_2N_measure": 0.0, "B_N_upper95": 3e-4, "B_2N_upper95": 3e-4}
    inp = Cz.CertInputs.from_stats(stats)
    assert inp.label == "statistical"
    cert = Cz.certify_theorem("main3", inp)
    assert cert.verdict == FAIL and cert.first_failure().name.startswith("(iii)")


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        Cz.CertInputs(Fraction(1, 10), Fraction(1, 10), Fraction(2), Fraction(0))
    with pytest.raises(ValueError):
        Cz.get_variant("nope")
    with pytest.raises(ValueError):
        Cz.certify_theorem("main3", Cz.CertInputs.at_threshold("main3"), prec=32)
