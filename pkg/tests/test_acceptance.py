"""Exit criteria. One test per criterion; the terminal summary lists PASS/FAIL for each.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from noma_ee import cli
from noma_ee.channel import SystemConfig, make_rng, sample_gains
from noma_ee.ee import (AntennaBudget, PowerModel, ee_gradient, ee_objective,
                        ee_second_derivative, maximize_ee, min_power)
from noma_ee.ergodic import ergodic_sum_rate_gcq, ergodic_sum_rate_mc, gain_cdf, gcq_coefficients
from noma_ee.rates import PowerAllocation, sic_rate, sum_rate

from oracles import ee_grid_search, richardson_derivative

pytestmark = pytest.mark.acceptance
SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
LN2 = math.log(2)


def report(n, ok, detail):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")


def test_criterion_1_gcq_mc_agreement():
    t0 = time.perf_counter()
    failures = []
    for K in (2, 3, 5):
        for rho_db in (10.0, 20.0):
            cfg = SystemConfig(K=K, R_D=10.0, alpha=2.0, rho=10 ** (rho_db / 10), seed=1000 + K)
            alloc = PowerAllocation.linear(K)
            gcq = ergodic_sum_rate_gcq(cfg, alloc, nodes=50)
            mc = ergodic_sum_rate_mc(cfg, alloc, 10**6)
            bound = 3 * mc.stderr + 0.01 * abs(mc.mean)
            print(f"  K={K} rho={rho_db:g} dB gcq={gcq:.6f} mc={mc.mean:.6f}±{mc.stderr:.2e}")
            if abs(gcq - mc.mean) > bound:
                failures.append((K, rho_db, gcq, mc.mean, bound))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed <= 60
    report(1, ok, f"6 scenarios, {elapsed:.1f}s, failures={failures}")
    assert not failures
    assert elapsed <= 60


def test_criterion_2_pdf_normalization():
    devs = {(R, a): abs(gcq_coefficients(50, R, a).normalization() - 1)
            for R in (1.0, 10.0, 100.0) for a in (2.0, 3.0, 4.0)}
    ladder = [abs(gcq_coefficients(n, 10.0, 2.0).normalization() - 1) for n in (10, 20, 40, 80)]
    ok = max(devs.values()) <= 1e-3 and all(b < a for a, b in zip(ladder, ladder[1:]))
    report(2, ok, f"max dev at N=50: {max(devs.values()):.2e}; N=10..80: {ladder}")
    assert max(devs.values()) <= 1e-3
    assert all(b < a for a, b in zip(ladder, ladder[1:]))


@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_criterion_3_pdf_shape(alpha):
    cfg = SystemConfig(K=1, R_D=10.0, alpha=alpha)
    g = sample_gains(cfg, 10**6, make_rng(303, int(alpha))).ravel()
    coeffs = gcq_coefficients(50, 10.0, alpha)
    ks = stats.kstest(g, lambda x: gain_cdf(x, coeffs)).statistic
    report(3, ks <= 0.01, f"alpha={alpha:g}: KS={ks:.2e}")
    assert ks <= 0.01


def test_criterion_4_gradient():
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        K = int(rng.integers(3, 129))
        power = PowerModel(P_RF=rng.uniform(0.0, 5.0), N_0=10 ** rng.uniform(-2, 0.5))
        P = min_power(power, K) * 10 ** rng.uniform(0.05, 3)
        fd = richardson_derivative(lambda p: ee_objective(p, power, K), P, 1e-3 * P)
        an = ee_gradient(P, power, K)
        worst = max(worst, abs(fd - an) / abs(an))
    power = PowerModel(P_RF=1.0, N_0=1.0)
    lit = ee_gradient(1.0, power, 16, form="paper_literal")
    cor = ee_gradient(1.0, power, 16)
    ok = (worst <= 1e-6 and abs(lit - (1 / LN2 - 1) / 4) <= 1e-12
          and abs(cor - (2 / LN2 - 1) / 4) <= 1e-12)
    report(4, ok, f"worst rel FD error {worst:.2e}; literal={lit:.5f} corrected={cor:.5f}")
    assert worst <= 1e-6
    assert lit == pytest.approx(0.11067, abs=5e-6) and lit == pytest.approx((1 / LN2 - 1) / 4, rel=1e-12)
    assert cor == pytest.approx(0.47135, abs=5e-6) and cor == pytest.approx((2 / LN2 - 1) / 4, rel=1e-12)


def test_criterion_5_high_snr_concavity():
    P = np.linspace(1.0, 100.0, 1000)
    worst = {}
    for K in (4, 16, 64):
        power = PowerModel(P_RF=1.0, N_0=0.01)
        worst[K] = max(ee_second_derivative(p, power, K) for p in P)
    ok = all(v < 0 for v in worst.values())
    report(5, ok, f"max second derivative per K: {worst}")
    assert ok, f"second derivative is not negative everywhere: max per K {worst}"


def test_criterion_6_dinkelbach():
    power = PowerModel(eta=1.0, P_c=0.0, P_RF=1.0, P_T=1000.0, N_0=1.0)
    sol = maximize_ee(power, AntennaBudget.single_antenna(16), 16, max_iter=50)
    P_grid, S_grid = ee_grid_search(1.0, 1.0, 16)
    S = [s for s, _, _ in sol.trace]
    rel = abs(sol.S_star - S_grid) / S_grid
    ok = (rel <= 1e-3 and all(b >= a for a, b in zip(S, S[1:]))
          and abs(sol.residual) <= 1e-8 and sol.iterations <= 50 and sol.converged)
    report(6, ok, f"S*={sol.S_star:.10f} P*={sol.P_star:.6f} grid=({P_grid}, {S_grid:.10f}) "
                  f"iters={sol.iterations} residual={sol.residual:.1e}")
    assert rel <= 1e-3
    assert all(b >= a for a, b in zip(S, S[1:]))
    assert abs(sol.residual) <= 1e-8
    assert sol.converged and sol.iterations <= 50


def test_criterion_7_rate_identities():
    rng = np.random.default_rng(707)
    bad = []
    for _ in range(1000):
        g, rho = 10 ** rng.uniform(-4, 3), 10 ** rng.uniform(-2, 4)
        if sum_rate([g], rho, PowerAllocation([1.0])).sum != math.log2(1 + rho * g):
            bad.append(("K=1", g, rho))
        K = int(rng.integers(2, 8))
        gains = 10 ** rng.uniform(-4, 3, size=K)
        rep = sum_rate(gains, rho, PowerAllocation(np.eye(K)[-1]))
        if rep.sum != math.log2(1 + rho * gains.max()) or np.any(rep.per_user[:-1] != 0):
            bad.append(("all-to-strongest", gains, rho))
        alloc = PowerAllocation(rng.dirichlet(np.ones(K)))
        k, c = int(rng.integers(0, K)), 10 ** rng.uniform(-3, 3)
        a, b = sic_rate(k, c * g, rho / c, alloc), sic_rate(k, g, rho, alloc)
        if abs(a - b) > 1e-12:
            bad.append(("scaling", k, g, rho, c, a - b))
    report(7, not bad, f"{len(bad)} violations in 1000 random draws")
    assert not bad


@pytest.mark.parametrize("command, file", [
    ("simulate", "simulate_k4.yaml"), ("ergodic", "regression_k3.yaml"),
    ("optimize", "default_ee.yaml"), ("sweep", "sweep_prf.yaml"),
])
def test_criterion_8_reproducible_from_header(tmp_path, command, file):
    first, again = tmp_path / "first.csv", tmp_path / "again.csv"
    assert cli.main([command, str(SCENARIOS / file), "--out", str(first)]) == 0
    assert cli.main([command, str(first), "--out", str(again)]) == 0
    same = first.read_bytes() == again.read_bytes()
    report(8, same, f"{command} {file}: byte-identical replay")
    assert same
