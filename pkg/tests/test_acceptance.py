"""Acceptance criteria. Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per criterion."""
import itertools
import math

import numpy as np
import pytest

from repkey import (
    HardwareParams,
    HqrGateParams,
    RepeaterConfig,
    Setup,
    ed_round_hqr,
    ed_round_oqr,
    es_level_hqr,
    es_level_oqr,
    initial_state_hqr,
    initial_state_oqr,
    key_rates,
    p0_hqr,
    p_no_flip,
    secret_fraction_di,
    zn,
)
from repkey.analytic import (
    CHSH_THRESHOLD,
    chsh_condition,
    closed_coeffs,
    closed_observables,
    derivatives_dd,
    derivatives_di,
    eta_impact_limit,
    n_bar,
    r_dd_formula,
    r_di_formula,
)
from repkey.cli import METRIC_COLUMNS, keyrate_row, main
from repkey.oracle import bell_coefficients, bell_state_matrix, chsh_oracle
from repkey.oracle.density import depolarizing, dissipative
from repkey.oracle import ed_oracle, es_oracle, mc_repeater
from repkey.rates import link_budget, probabilistic_rate, z1_closed

from conftest import random_states
from test_cli import CANNED_SWEEPS, as_params, parse, run


def report(number, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    return ok


def test_1_closed_form_vs_iteration():
    worst = 0.0
    for p_g, n in itertools.product((0.9, 0.95, 0.99, 1.0), range(5)):
        s = initial_state_oqr(1.0)
        for _ in range(n):
            s = es_level_oqr(s, p_g)
        worst = max(worst, float(np.max(np.abs(s.as_array() - closed_coeffs(p_g, n).as_array()))))
    assert report(1, worst <= 1e-12, f"iterated swapping vs closed form, max abs err {worst:.2e} (tol 1e-12)")


def test_2_oracle_equivalence():
    worst = 0.0
    count = 0
    states = random_states(100, seed=2024)
    for p_g in (1.0, 0.99, 0.9):
        hqr = p_no_flip(p_g)
        for s in states:
            rho = bell_state_matrix(s.as_array())
            for model, ed, es in (
                (depolarizing(p_g), ed_round_oqr(s, p_g), es_level_oqr(s, p_g)),
                (dissipative(hqr.p_c), ed_round_hqr(s, hqr), es_level_hqr(s, hqr)),
            ):
                out, p = ed_oracle(rho, model)
                c_ed, r1 = bell_coefficients(out)
                c_es, r2 = bell_coefficients(es_oracle(rho, rho, model))
                worst = max(
                    worst,
                    float(np.max(np.abs(c_ed - ed.state.as_array()))),
                    abs(p - ed.p_success),
                    float(np.max(np.abs(c_es - es.as_array()))),
                    r1,
                    r2,
                )
                count += 1
    ok = worst <= 1e-12 and count >= 200
    assert report(2, ok, f"{count} oracle comparisons over both models, max err {worst:.2e} (tol 1e-12)")


def test_3_chsh_specialization():
    worst = 0.0
    for s in random_states(200, seed=3):
        rho = bell_state_matrix(s.as_array())
        worst = max(worst, abs(chsh_oracle(rho) - 2 * math.sqrt(2) * (s.c1 - s.c4)))
    phi1 = abs(chsh_oracle(bell_state_matrix([1, 0, 0, 0])) - 2 * math.sqrt(2))
    ok = worst <= 1e-12 and phi1 <= 1e-12
    assert report(3, ok, f"CHSH oracle vs 2sqrt2(c1-c4) err {worst:.2e}, |phi1> err {phi1:.2e}")


def _straddle(threshold):
    for n in (1, 2, 3):
        for eta in (0.9, 0.95, 0.97, 1.0):
            p_star = (threshold / eta**2) ** (1 / n_bar(n))
            for p_g, above in ((p_star * (1 + 1e-6), True), (p_star * (1 - 1e-6), False)):
                if p_g <= 1.0:
                    yield p_g, eta, n, above


def test_4a_chsh_violation_threshold():
    bad = 0
    for p_g, eta, n, above in _straddle(CHSH_THRESHOLD):
        _, _, s = closed_observables(p_g, eta, n)
        bad += ((s > 2) is not above) + (chsh_condition(p_g, eta, n) is not above)
    assert report("4a", bad == 0, f"S > 2 toggles exactly at eta^2 p_g^nbar = 1/sqrt2, {bad} mismatches")


@pytest.mark.xfail(
    strict=True,
    reason="the DI bound is negative just above S = 2; it turns positive only at eta^2 p_g^nbar = 0.857016",
)
def test_4b_di_fraction_positive_exactly_at_chsh_threshold():
    bad = 0
    total = 0
    for p_g, eta, n, above in _straddle(CHSH_THRESHOLD):
        _, q, s = closed_observables(p_g, eta, n)
        bad += (secret_fraction_di(q, s) > 0) is not above
        total += 1
    assert report(
        "4b", bad == 0, f"r_di > 0 iff eta^2 p_g^nbar > 1/sqrt2: {bad}/{total} grid points disagree"
    )


def test_5_dd_dominance():
    violations = 0
    points = 0
    for setup, l_total in ((Setup.OQR, 600.0), (Setup.HQR, 300.0)):
        for f0, p_g, eta, n, k in itertools.product(
            np.linspace(0.8, 1.0, 9), np.linspace(0.95, 1.0, 6), np.linspace(0.9, 1.0, 5), range(4), range(4)
        ):
            rec = key_rates(RepeaterConfig(setup, l_total, n, k), HardwareParams(p_g, eta, f0))
            violations += rec.key_dd < rec.key_di
            points += 1
    ideal = key_rates(RepeaterConfig("oqr", 600.0, 3, 0), HardwareParams(1.0, 1.0, 1.0))
    gap = abs(ideal.key_dd - ideal.key_di)
    ok = violations == 0 and gap <= 1e-12
    assert report(5, ok, f"key_dd >= key_di on {points} points ({violations} violations), ideal gap {gap:.1e}")


def test_6_distillation_at_600km():
    f0s = np.linspace(0.8, 1.0, 81)
    recs = {k: [key_rates(RepeaterConfig("oqr", 600.0, 3, k), HardwareParams(0.99, 0.975, f)) for f in f0s]
            for k in range(4)}
    di_k0 = any(r.key_di > 0 for r in recs[0])
    di_zero = all(r.key_di == 0.0 for k in (1, 2, 3) for r in recs[k])
    dd_pos = all(recs[k][-1].key_dd > 0 for k in range(4))
    ok = di_k0 and di_zero and dd_pos
    assert report(6, ok, f"DI key only for k=0: {di_k0 and di_zero}; DD key for k<=3 near f0=1: {dd_pos}")


def test_7_derivatives():
    h = 1e-6
    worst = 0.0
    ordering = True
    for eta, p_g, n in itertools.product((0.9, 0.93, 0.96, 0.99), (0.95, 0.97, 0.99, 0.999), (1, 2, 3)):
        if eta * eta * p_g ** n_bar(n) <= CHSH_THRESHOLD + 0.01:
            continue
        for formula, exact in ((r_dd_formula, derivatives_dd(eta, p_g, n)), (r_di_formula, derivatives_di(eta, p_g, n))):
            numeric = (
                (formula(p_g, eta + h, n) - formula(p_g, eta - h, n)) / (2 * h),
                (formula(p_g + h, eta, n) - formula(p_g - h, eta, n)) / (2 * h),
                (formula(p_g, eta, n + h) - formula(p_g, eta, n - h)) / (2 * h),
            )
            worst = max(worst, max(abs(a - b) / abs(b) for a, b in zip(exact, numeric)))
        ordering &= derivatives_di(eta, p_g, n)[0] > derivatives_dd(eta, p_g, n)[0]
    lim = eta_impact_limit()
    ok = worst <= 1e-6 and ordering and abs(lim - 4.684) <= 1e-3 and lim > 2
    assert report(7, ok, f"FD rel err {worst:.1e}, d_eta ordering {ordering}, limit {lim:.5f}")


def test_8_z_identities():
    ps = np.linspace(0.01, 1.0, 100)
    z1 = max(abs(zn(1, p) - z1_closed(p)) for p in ps)
    ones = all(zn(n, 1.0) == 1.0 for n in range(6))
    asym = 0.0
    for n in range(4):
        harmonic = sum(1.0 / j for j in range(1, 2**n + 1))
        asym = max(asym, abs(zn(n, 1e-4) * 1e-4 / harmonic - 1.0))
    ok = z1 <= 1e-12 and ones and asym < 0.01
    assert report(8, ok, f"Z_1 err {z1:.1e}, Z_n(1)=1 {ones}, harmonic rel dev {asym:.2e}")


def test_9_monte_carlo():
    checks = []
    for p, n in itertools.product((0.1, 0.5), (1, 2)):
        est = mc_repeater(p, [], n, 100_000, seed=7)
        checks.append(abs(est.mean_attempts - zn(n, p)) <= 3 * est.std_error)
    unit = link_budget(1.0, c_fiber=2e3)  # T0 = 1
    p_es = 0.975**2
    z_order = []
    for p0, n in itertools.product((0.01, 0.05), (1, 2)):
        est = mc_repeater(p0, [p_es] * n, n, 100_000, seed=8)
        formula = probabilistic_rate(unit, n, p0, p_es=[p_es] * n).rate_hz
        mc_rate = 1.0 / est.mean_attempts
        mc_sigma = est.std_error / est.mean_attempts**2
        checks.append(formula <= mc_rate + 3 * mc_sigma)
        # the two strategies differ by less than the noise here, so compare one-sided at 3 sigma
        imm = mc_repeater(p0, [p_es] * n, n, 100_000, seed=9, strategy="immediate")
        z = (imm.mean_attempts - est.mean_attempts) / math.hypot(imm.std_error, est.std_error)
        z_order.append(z)
        checks.append(z <= 3.0)
    ok = all(checks)
    detail = f"{sum(checks)}/{len(checks)} checks within 3 sigma; immediate-minus-waitall z max {max(z_order):+.2f}"
    assert report(9, ok, detail)


def test_10_hqr_anchors():
    anchors = p_no_flip(1.0).p_c == 1.0
    for eta_t, eta_d in itertools.product((1e-3, 0.1, 0.676, 0.999), (0.5, 0.9, 1.0)):
        anchors &= p0_hqr(1.0, eta_t, eta_d) == 0.0 and p0_hqr(0.5, eta_t, eta_d) == 1.0
    worst = 0.0
    rng = np.random.default_rng(10)
    for _ in range(200):
        params = p_no_flip(rng.uniform(0.5, 1.0))
        s = initial_state_hqr(rng.uniform(0.5, 1.0))
        for _ in range(rng.integers(0, 4)):
            s = ed_round_hqr(s, params).state
        for _ in range(rng.integers(0, 4)):
            s = es_level_hqr(s, params)
            worst = max(worst, abs(sum(s) - 1.0))
        worst = max(worst, abs(sum(ed_round_hqr(s, params).state) - 1.0))
    worst = max(worst, abs(sum(es_level_hqr(initial_state_hqr(0.7), HqrGateParams.from_p_c(0.5))) - 1))
    ok = anchors and worst <= 1e-9
    assert report(10, ok, f"exact anchors {anchors}, normalization err {worst:.1e}")


def test_11_csv_invariants():
    ok = True
    for argv in CANNED_SWEEPS:
        a, b = run(argv)[1], run(argv)[1]
        ok &= a == b
        for row in parse(a):
            if row["reason"]:
                continue
            again = keyrate_row(as_params(row))
            ok &= all(math.isclose(float(row[c]), again[c], rel_tol=1e-9, abs_tol=1e-300) for c in METRIC_COLUMNS)
    assert report(11, ok, f"{len(CANNED_SWEEPS)} canned sweeps byte-identical and round-trip to 1e-9")
