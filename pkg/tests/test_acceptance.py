"""Acceptance criteria 1-7.  Each test prints one ``PASS``/``FAIL`` line.

Criterion 7 is a report that never gates the build; it runs only when
``SKEWLYAP_PHYSICS=1`` because it takes tens of minutes.
"""

import math
import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from skewlyap import avalanche, certifier, cocycle, constants, diophantine, harmonic, lyapunov
from skewlyap.ledger import FAIL, PASS


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        with capsys.disabled():
            print(f"\n{status} criterion {number}: {detail}")
    return emit


def _fail_lines(checks):
    return "; ".join(name for name, ok in checks if not ok) or "all checks hold"


def test_criterion_1_constants_ledger(report):
    t0 = time.perf_counter()
    led = constants.numeric_ledger(constants.Radii(4, 3, 2), (Fraction(1, 2), Fraction(1)))
    elapsed = time.perf_counter() - t0
    wanted = ["eps_small margin", "C < 11.97", "2 sqrt(2 C0) + C0 < 10", "U(1,4) > 1/2",
              "U(lambda,1) <= log(38)/2", "4 U(lambda,1) >= 2 log 6", "B4-m4 >= 4 log 2 + 1/2",
              "B4-m4 <= 4 log 2 + 1", "48 B3 sqrt(2 U1 (B4-m4)) < 11518",
              "96 B3 U1 sqrt(2 log 2) < 13317", "144 + (11518/203)", "831 + (13317/203)",
              "C4 > 46", "C4 < 47", "C5 > 270", "C2 C5 < 5.5e4"]
    checks = []
    for prefix in wanted:
        entries = [e for e in led if e.name.startswith(prefix)]
        per_lambda = 2 if "lambda" in prefix or "B4-m4" in prefix or "U1" in prefix else 1
        ok = len(entries) >= per_lambda
        for e in entries:
            strict = e.rel in ("<", ">")
            ok &= e.verdict == PASS and (e.margin_lower() > 0 if strict else e.margin_lower() >= 0)
        checks.append((prefix, ok))
    checks.append(("runs in < 1 s", elapsed < 1.0))
    ok = all(c for _, c in checks)
    report(1, ok, f"{len(led)} ledger entries in {elapsed:.2f}s; {_fail_lines(checks)}")
    assert ok


def test_criterion_2_harmonic_oracles(report):
    t0 = time.perf_counter()
    r = harmonic.verify_all(size=1 << 16, seed=7)
    elapsed = time.perf_counter() - t0
    p2 = r["poisson_R2_2"]
    checks = [
        ("int |d P| = 16/3", abs(p2["measured1"] - 16 / 3) <= 1e-8 * 16 / 3),
        ("second-derivative closed form", all(r[k]["rel_err2"] < 1e-8 for k in ("poisson_R2_2", "poisson_R2_3"))),
        ("||log|1-e(phi)|||_1 < 13/20", r["h1"]["measured"] < 13 / 20),
        ("atom eps=1/17 <= 4.5", r["atom_eps_1_17"]["l1"] <= 4.5 * 1.02),
        ("atom eps=1/36 <= 4.2", r["atom_eps_1_36"]["l1"] <= 4.2 * 1.02),
        ("exp integrability over 100 samples", r["exp_integrability"]["trials"] == 100
         and r["exp_integrability"]["worst"] <= 2 * math.sqrt(2)),
        ("runs in < 30 s", elapsed < 30),
    ]
    ok = all(c for _, c in checks)
    report(2, ok, f"grid 2^16 in {elapsed:.1f}s; atoms {r['atom_eps_1_17']['l1']:.3f}, "
                  f"{r['atom_eps_1_36']['l1']:.3f}; {_fail_lines(checks)}")
    assert ok


def test_criterion_3_cocycle(report):
    t0 = time.perf_counter()
    rng = random.Random(2024)
    phases = [(rng.getrandbits(128), rng.getrandbits(128)) for _ in range(100)]
    params = cocycle.CocycleParams(0.5, 0.3)
    worst_small = 0.0
    for x, y in phases:
        for n in (1, 6, 12):
            P = cocycle.transfer_product(params, x, y, n)
            ref = np.array(cocycle.transfer_product_mp(params, x, y, n, dps=34).tolist(), dtype=float)
            got = P.array() * math.exp(P.log_scale)
            worst_small = max(worst_small, float(np.abs(got - ref).max() / np.abs(ref).max()))
    worst_u = 0.0
    for x, y in phases:
        u = cocycle.u_n(params, x, y, 1000)
        ref = float(cocycle.log_norm_mp(cocycle.transfer_product_mp(params, x, y, 1000, dps=34), dps=34)) / 1000
        worst_u = max(worst_u, abs(u - ref) / abs(ref))
    worst_id = 0.0
    for x, y in phases[:20]:
        whole = cocycle.transfer_product(params, x, y, 300)
        xs, ys = cocycle.skew_orbit(x, y, 120)
        split = cocycle.transfer_product(params, xs, ys, 180) @ cocycle.transfer_product(params, x, y, 120)
        worst_id = max(worst_id, abs(whole.log_norm() - split.log_norm()) / abs(whole.log_norm()))
    orbit_ok = all(cocycle.skew_orbit(x, y, n) == cocycle.skew_orbit_closed(x, y, n)
                   for x, y in phases[:3] for n in (10 ** 3, 10 ** 5))
    w = complex(math.cos(0.7), math.sin(0.7))
    herman = max(abs(cocycle.v_n(lam, 0.1, 0j, w, 50) - math.log(lam)) for lam in (0.5, 0.8, 1.0))
    elapsed = time.perf_counter() - t0
    checks = [("n <= 12 product rel 1e-10", worst_small <= 1e-10), ("u_1000 rel 1e-8", worst_u <= 1e-8),
              ("cocycle identity 1e-9", worst_id <= 1e-9), ("orbit closed form bit-exact", orbit_ok),
              ("v_n(0, w) = log lambda to 1e-12", herman <= 1e-12), ("runs in < 10 s", elapsed < 10)]
    ok = all(c for _, c in checks)
    report(3, ok, f"product {worst_small:.1e}, u_1000 {worst_u:.1e}, identity {worst_id:.1e} "
                  f"in {elapsed:.1f}s; {_fail_lines(checks)}")
    assert ok


def test_criterion_4_avalanche_fuzz(report):
    t0 = time.perf_counter()
    chains = avalanche.ap_fuzz(trials=10 ** 4, n_max=100, seed=1)
    pairs = avalanche.pair_fuzz(trials=10 ** 4, seed=1)
    elapsed = time.perf_counter() - t0
    checks = [("zero violations of (i)", chains["violations_i"] == 0),
              ("zero violations of (ii)", chains["violations_ii"] == 0),
              ("alpha <= rho <= beta on pairs", pairs["violations"] == 0),
              ("runs in < 2 min", elapsed < 120)]
    ok = all(c for _, c in checks)
    report(4, ok, f"{chains['admissible']} admissible chains, {pairs['trials']} pairs in {elapsed:.1f}s; "
                  f"worst (i) at {chains['worst_fraction_of_bound_i']:.3f} of bound; {_fail_lines(checks)}")
    assert ok


def test_criterion_5_diophantine(report):
    t0 = time.perf_counter()
    three_k = diophantine.check_three_k_bound(10 ** 6)
    cf = diophantine.continued_fraction(cocycle.OMEGA, depth=50)
    s1 = [diophantine.weyl_S1(K, p2) for K, p2 in ((38, 38), (10 ** 3, 10 ** 4), (10 ** 4, 10 ** 4))]
    gen = np.random.Generator(np.random.Philox(key=5))
    s23 = [diophantine.weyl_S2_S3(100, 10, 100, int.from_bytes(gen.bytes(16), "little"))
           for _ in range(100)]
    div = diophantine.divisor_bounds(10 ** 7)
    elapsed = time.perf_counter() - t0
    checks = [("||k omega|| >= 1/(3k), k <= 1e6", three_k["passed"]),
              ("partial quotients all 1 to depth 50", cf.partial_quotients == [1] * 50),
              ("S1 bound at three (K, p2)", all(r["passed"] for r in s1)),
              ("S2/S3 bounds over 100 y", all(r["passed"] for r in s23)),
              ("tau* bounds for m <= 1e7", div["passed"]),
              ("runs in < 1 min", elapsed < 60)]
    ok = all(c for _, c in checks)
    report(5, ok, f"worst 3k ratio {three_k['worst_ratio']:.3f}, tau*(1e7) = {div['tau_star']} "
                  f"in {elapsed:.1f}s; {_fail_lines(checks)}")
    assert ok


def _perturbed_main3(L_scale=1, diff_scale=1, B_scale=1):
    v = certifier.get_variant("main3")
    L = v.threshold * L_scale
    B = Fraction(B_scale, v.N0 ** v.power)
    return certifier.CertInputs(L, L - L / 8 * diff_scale, B, B)


def test_criterion_6_certifier(report):
    t0 = time.perf_counter()
    led = certifier.verify_paper(128)
    names = [e.name for e in led]

    def has(fragment, variant=None):
        hits = [e for e in led if fragment in e.name and (variant is None or f"[{variant}]" in e.name)]
        return bool(hits) and all(e.verdict == PASS for e in hits)

    cert = certifier.certify_theorem("main3", certifier.CertInputs.at_threshold("main3"))
    perturbed = {
        "(i)": certifier.certify_theorem("main3", _perturbed_main3(L_scale=Fraction(9, 10))),
        "(ii)": certifier.certify_theorem("main3", _perturbed_main3(diff_scale=Fraction(6, 5))),
        "(iii)": certifier.certify_theorem("main3", _perturbed_main3(B_scale=3 * 10 ** 4)),
    }
    elapsed = time.perf_counter() - t0
    checks = [
        ("verify-paper all pass", led.verdict() == PASS),
        ("scale ratio: at (2e37, (2e37)^9, a=7)", has("scale ratio:", "main") and any("j=0, a=7" in n for n in names)),
        ("2.06e186 with monotone tail", all(has("2.06e186", v) for v in ("main", "main2", "main3"))),
        ("10^334 with monotone tail", has("x = 10^334", "main") and has("beyond 10^334", "main")),
        ("10^320 with monotone tail", has("x = 10^320", "main3") and has("beyond 10^320", "main3")),
        ("29974 < N0", has("29974 < N0", "main2")),
        ("2938 < N0", has("2938 < N0", "main3")),
        ("main3 threshold conclusion >= 1e-3", cert.verdict == PASS and cert.conclusion >= Fraction(1, 1000)),
    ]
    for cond, c in perturbed.items():
        first = c.first_failure()
        checks.append((f"perturbation fails at {cond}", c.verdict == FAIL and first is not None
                       and first.verdict == FAIL and first.name.startswith(cond)))
    checks.append(("runs in < 10 s", elapsed < 10))
    ok = all(c for _, c in checks)
    report(6, ok, f"{len(led)} ledger entries, main3 conclusion L >= {float(cert.conclusion):.4g} "
                  f"in {elapsed:.1f}s; {_fail_lines(checks)}")
    assert ok


def test_criterion_7_physics_report(report):
    if os.environ.get("SKEWLYAP_PHYSICS") != "1":
        report(7, "SKIP", "report-only, not run (set SKEWLYAP_PHYSICS=1; about 10-30 min)")
        pytest.skip("report-only physics run disabled")
    samples = int(os.environ.get("SKEWLYAP_PHYSICS_SAMPLES", "10000"))
    N, lam = 3 * 10 ** 4, 0.5
    plan = lyapunov.SamplingPlan(samples=samples, seed=0)
    t0 = time.perf_counter()
    rows = lyapunov.sweep_energies(lam, N, plan, 33)
    elapsed = time.perf_counter() - t0
    rel = max(se / L for _, L, se, _, _ in rows)
    ratios = [L / lam ** 2 for _, L, _, _, _ in rows]
    m = samples
    cp_floor = lyapunov.clopper_pearson_upper(0, m)
    ok = rel < 0.1
    report(7, ok, f"33 energies at N = 3e4, {samples} samples in {elapsed / 60:.1f} min; "
                  f"worst stderr/mean {rel:.2%}; min L_N/lambda^2 = {min(ratios):.4f} "
                  f"(conjectured c > 1e-2: {'consistent' if min(ratios) > 1e-2 else 'not observed'}); "
                  f"measure condition (iii) needs 30000^-165 but {m} samples certify only "
                  f"{cp_floor:.2e} at 95% (not reproducible by sampling)")
