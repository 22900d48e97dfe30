import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from repkey import DomainError, es_level_oqr, initial_state_oqr, secret_fraction_di
from repkey.analytic import (
    CHSH_THRESHOLD,
    artanh,
    chsh_condition,
    closed_coeffs,
    closed_observables,
    closed_secret_fractions,
    derivatives_dd,
    derivatives_di,
    di_key_threshold,
    eta_impact_limit,
    n_bar,
    q_fn,
    r_dd_formula,
    r_di_formula,
    sensitivity,
)

H = 1e-6


def violation_grid():
    for eta, p_g, n in itertools.product((0.9, 0.93, 0.96, 0.99), (0.95, 0.97, 0.99, 0.999), (1, 2, 3)):
        if eta * eta * p_g ** n_bar(n) > CHSH_THRESHOLD + 0.01:
            yield eta, p_g, n


def central(f, x):
    return (f(x + H) - f(x - H)) / (2 * H)


def numeric_derivatives(formula, eta, p_g, n):
    return (
        central(lambda v: formula(p_g, v, n), eta),
        central(lambda v: formula(v, eta, n), p_g),
        central(lambda v: formula(p_g, eta, v), n),
    )


@pytest.mark.parametrize("p_g", [0.9, 0.95, 0.99, 1.0])
@pytest.mark.parametrize("n", range(5))
def test_closed_coeffs_match_iteration(p_g, n):
    s = initial_state_oqr(1.0)
    for _ in range(n):
        s = es_level_oqr(s, p_g)
    assert np.max(np.abs(s.as_array() - closed_coeffs(p_g, n).as_array())) <= 1e-12


def test_closed_observables_example():
    q_dd, q_di, s = closed_observables(0.99, 1.0, 2)
    x = 0.99**3
    assert q_dd == pytest.approx((1 - x) / 2)
    assert q_di == pytest.approx(q_dd)
    assert s == pytest.approx(2 * math.sqrt(2) * x)


@pytest.mark.parametrize(
    "eta, x, expected", [(1.0, 0.70, False), (1.0, 0.72, True), (0.8, 1.0, False)]
)
def test_chsh_condition_examples(eta, x, expected):
    # n = 1 gives n_bar = 1, so p_g plays the role of x directly
    assert chsh_condition(x, eta, 1) is expected


def straddle(threshold):
    """(p_g, eta, n, above) pairs at relative distance 1e-6 around the boundary."""
    for n in (1, 2, 3):
        nb = n_bar(n)
        for eta in (0.95, 0.97, 1.0):
            p_star = (threshold / eta**2) ** (1 / nb)
            for p_g, above in ((p_star * (1 + 1e-6), True), (p_star * (1 - 1e-6), False)):
                if p_g <= 1:
                    yield p_g, eta, n, above


def test_chsh_violation_straddle():
    for p_g, eta, n, above in straddle(CHSH_THRESHOLD):
        _, _, s = closed_observables(p_g, eta, n)
        assert (s > 2) is above
        assert chsh_condition(p_g, eta, n) is above


def test_di_key_threshold():
    y = di_key_threshold()
    assert y == pytest.approx(0.857016482311, abs=1e-11)
    assert y > CHSH_THRESHOLD
    for p_g, eta, n, above in straddle(y):
        _, q_di, s = closed_observables(p_g, eta, n)
        assert (secret_fraction_di(q_di, s) > 0) is above


def test_di_fraction_vanishes_just_above_chsh_threshold():
    # S > 2 is necessary for a DI key but not sufficient
    for p_g, eta, n, above in straddle(CHSH_THRESHOLD):
        if above:
            _, q_di, s = closed_observables(p_g, eta, n)
            assert s > 2 and secret_fraction_di(q_di, s) == 0.0


def test_artanh_and_q_limit():
    assert artanh(1 / math.sqrt(2)) == pytest.approx(0.881373587019543, abs=1e-12)
    with pytest.raises(DomainError):
        artanh(1.0)
    # q grows without bound as x -> 1 and approaches its threshold value from above
    assert q_fn(1.0, 0.999999, 1) > q_fn(1.0, 0.99, 1)
    with pytest.raises(DomainError):
        q_fn(0.8, 1.0, 1)


@pytest.mark.parametrize("eta, p_g, n", list(violation_grid()))
def test_dd_derivatives_against_finite_differences(eta, p_g, n):
    exact = derivatives_dd(eta, p_g, n)
    numeric = numeric_derivatives(r_dd_formula, eta, p_g, n)
    for a, b in zip(exact, numeric):
        assert a == pytest.approx(b, rel=1e-6)


@pytest.mark.parametrize("eta, p_g, n", list(violation_grid()))
def test_di_derivatives_against_finite_differences(eta, p_g, n):
    exact = derivatives_di(eta, p_g, n)
    numeric = numeric_derivatives(r_di_formula, eta, p_g, n)
    for a, b in zip(exact, numeric):
        assert a == pytest.approx(b, rel=1e-6)


@pytest.mark.parametrize("eta, p_g, n", list(violation_grid()))
def test_di_more_sensitive_to_detectors(eta, p_g, n):
    assert derivatives_di(eta, p_g, n)[0] > derivatives_dd(eta, p_g, n)[0]
    assert derivatives_dd(eta, p_g, n)[2] < 0 and derivatives_di(eta, p_g, n)[2] < 0


def test_eta_impact_limit():
    lim = eta_impact_limit()
    assert lim == pytest.approx(4.684, abs=1e-3)
    assert lim > 2
    # eta * d r_di / d eta approaches the limit at the threshold
    for eps in (1e-4, 1e-6):
        eta = math.sqrt(CHSH_THRESHOLD * (1 + eps))
        assert eta * derivatives_di(eta, 1.0, 1)[0] == pytest.approx(lim, rel=1e-2)


def test_perfect_gates_flag_infinite_slope():
    d_eta, d_pg, d_n = derivatives_dd(1.0, 1.0, 2)
    assert d_eta == pytest.approx(2.0) and d_pg == math.inf and d_n == 0.0
    with pytest.raises(DomainError):
        derivatives_di(0.8, 0.99, 2)


def test_sensitivity_below_threshold_has_no_di():
    rep = sensitivity(0.9, 0.9, 3)
    assert not rep.chsh and rep.r_di == 0.0 and math.isnan(rep.d_eta_di)
    assert rep.n_bar == 7


@given(st.floats(0.9, 1.0), st.floats(0.9, 1.0), st.integers(0, 4))
def test_closed_fractions_ordered(p_g, eta, n):
    r_dd, r_di = closed_secret_fractions(p_g, eta, n)
    assert 0.0 <= r_di <= r_dd + 1e-12 and r_dd <= 1.0
