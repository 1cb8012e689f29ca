import math

import numpy as np
import pytest

from skewlyap import lyapunov as Ly
from skewlyap.cocycle import CocycleParams

PARAMS = CocycleParams(0.5, 0.0)


def test_n1_estimate_matches_quadrature():
    plan = Ly.SamplingPlan(samples=20_000, seed=3)
    mean, se = Ly.estimate_L(PARAMS, 1, plan)
    assert abs(mean - Ly.lyapunov_n1_oracle(PARAMS)) < 4 * se


def test_grid_n1_matches_quadrature_closely():
    plan = Ly.SamplingPlan(mode="grid", samples=256 ** 2)
    mean, _ = Ly.estimate_L(PARAMS, 1, plan)
    # |E - cos| has kinks, so the 256-point rule converges only like 256^-2
    assert mean == pytest.approx(Ly.lyapunov_n1_oracle(PARAMS), abs=1e-4)


def test_same_seed_same_result():
    plan = Ly.SamplingPlan(samples=500, seed=42)
    assert Ly.estimate_scale_stats(PARAMS, 50, plan) == Ly.estimate_scale_stats(PARAMS, 50, plan)


def test_thread_count_does_not_change_result():
    plan = Ly.SamplingPlan(samples=3000, seed=1)
    a = Ly.sample_log_norms(PARAMS, plan, [40], threads=1, chunk=256)[40]
    b = Ly.sample_log_norms(PARAMS, plan, [40], threads=4, chunk=256)[40]
    assert np.array_equal(a, b)


def test_env_thread_fallback(monkeypatch):
    monkeypatch.setenv("SKEWLYAP_THREADS", "3")
    assert Ly.default_threads() == 3
    monkeypatch.setenv("SKEWLYAP_THREADS", "junk")
    assert Ly.default_threads() == 1


def test_double_double_agrees_with_double():
    plan = Ly.SamplingPlan(mode="grid", samples=16, precision="double")
    dd = Ly.SamplingPlan(mode="grid", samples=16, precision="double-double")
    a = Ly.sample_log_norms(PARAMS, plan, [30])[30]
    b = Ly.sample_log_norms(PARAMS, dd, [30])[30]
    assert np.allclose(a, b, rtol=1e-9)


def test_plan_validation():
    with pytest.raises(ValueError):
        Ly.SamplingPlan(mode="grid", samples=10)
    with pytest.raises(ValueError):
        Ly.SamplingPlan(mode="sobol")
    with pytest.raises(ValueError):
        Ly.SamplingPlan(precision="quad")


def test_clopper_pearson():
    assert Ly.clopper_pearson_upper(0, 1000) == pytest.approx(1 - 0.05 ** (1 / 1000))
    assert Ly.clopper_pearson_lower(0, 1000) == 0.0
    assert Ly.clopper_pearson_lower(10, 100) < 0.1 < Ly.clopper_pearson_upper(10, 100)


def _stats(L, L2, B, N=3 * 10 ** 4, se=1e-6, m=10 ** 4):
    return Ly.ScaleStats(N=N, L_N=L, stderr_L=se, L_2N=L2, stderr_L2=se, B_N_measure=B,
                         B_2N_measure=B, B_N_upper95=Ly.clopper_pearson_upper(round(B * m), m),
                         B_2N_upper95=Ly.clopper_pearson_upper(round(B * m), m), samples=m, seed=0)


def test_initial_conditions_verdicts():
    good = Ly.check_initial_conditions(_stats(0.08, 0.079, 0.0), "main3")
    assert good["i"]["verdict"] == Ly.PASS and good["ii"]["verdict"] == Ly.PASS
    # no finite sample can certify a measure of 30000^-165
    assert good["iii"]["verdict"] == Ly.UNRESOLVED
    low = Ly.check_initial_conditions(_stats(1e-3, 1e-3, 0.0), "main3")
    assert low["i"]["verdict"] == Ly.FAIL
    drop = Ly.check_initial_conditions(_stats(0.08, 0.05, 0.0), "main3")
    assert drop["ii"]["verdict"] == Ly.FAIL
    big = Ly.check_initial_conditions(_stats(0.08, 0.079, 0.2), "main3")
    assert big["iii"]["verdict"] == Ly.FAIL


def test_initial_conditions_need_matching_scale():
    with pytest.raises(ValueError):
        Ly.check_initial_conditions(_stats(0.08, 0.079, 0.0, N=100), "main3")


def test_energy_grid_and_sweeps():
    assert len(Ly.energy_grid(0.5, 33)) == 33
    assert Ly.energy_grid(0.5, 33)[0] == -3.0
    plan = Ly.SamplingPlan(samples=100, seed=0)
    rows = Ly.sweep_couplings(0.0, [0.5, 1.0], 20, plan)
    assert [r[0] for r in rows] == [0.5, 1.0]
    assert rows[1][3] == pytest.approx(rows[1][1])


def test_deviation_set():
    u = np.array([1.0, 1.05, 1.2, 0.85])
    assert list(Ly.in_deviation_set(u, 1.0)) == [False, False, True, True]
