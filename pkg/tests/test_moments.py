import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from spanset.moments import (NonConvergenceError, QuadratureConfig, ball_prob, c_d, case3_integral,
                             case3_upper_bound, energy_bound, energy_threshold, m1_asymptotic, m1_exact, m2_limit,
                             mc_span_measure, tail_power)
from spanset.special import exp1


@given(st.floats(1e-3, 50))
def test_exp1_matches_scipy(x):
    assert exp1(x) == pytest.approx(special.exp1(x), rel=1e-13)


@given(st.floats(0.05, 20))
def test_m1_asymptotic_closed_forms(a):
    assert m1_asymptotic(2, a) == pytest.approx(special.exp1(a) / 2, rel=1e-9)
    # d = 3: int_a^inf e^-t t^-3/2 = 2 e^-a / sqrt(a) - 2 sqrt(pi) erfc(sqrt(a))
    closed = 2 * math.exp(-a) / math.sqrt(a) - 2 * math.sqrt(math.pi) * math.erfc(math.sqrt(a))
    assert m1_asymptotic(3, a) == pytest.approx(c_d(3) * closed, rel=1e-9)


def test_ball_probability():
    assert c_d(2) == pytest.approx(0.5)
    assert c_d(3) == pytest.approx(1 / (2 ** 1.5 * math.gamma(2.5)))
    for t in (0.01, 1.0, 30.0):
        r3 = integrate.quad(lambda r: 4 * math.pi * r * r * math.exp(-r * r / (2 * t)), 0, 0.3)[0]
        assert ball_prob(3, 0.3, t) == pytest.approx(r3 / (2 * math.pi * t) ** 1.5, rel=1e-9)
    # tiny balls use the series branch
    assert ball_prob(3, 1e-4, 1.0) == pytest.approx(c_d(3) * 1e-12, rel=1e-6)


def test_m1_exact_against_direct_quadrature():
    ref = integrate.quad(lambda t: math.exp(-t) * -math.expm1(-0.05 ** 2 / (2 * t)), 1, math.inf,
                         epsabs=1e-15, epsrel=1e-12)[0]
    r = m1_exact(2, 1.0, 0.05)
    assert r.value == pytest.approx(ref, rel=1e-9)
    assert r.diagnostics["scaled"] == pytest.approx(0.1096456, abs=1e-7)
    assert m1_exact(3, 1.0, 0.05).diagnostics["scaled"] == pytest.approx(0.0473552, abs=1e-7)


@pytest.mark.parametrize("d", [2, 3])
def test_m1_scaled_increases_to_limit_as_eps_shrinks(d):
    lim = m1_asymptotic(d, 1.0)
    vals = [m1_exact(d, 1.0, e).diagnostics["scaled"] for e in (0.4, 0.2, 0.1, 0.05, 0.025)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    assert all(v < lim for v in vals)
    assert 0.99 < vals[-1] / lim < 1


def test_tail_power_validation():
    with pytest.raises(ValueError):
        tail_power(2, 0.0)
    with pytest.raises(ValueError):
        m1_asymptotic(4, 1.0)


M2_FROZEN = {2: 0.44291108451562455, 3: 0.156212677670781}


@pytest.mark.parametrize("d", [2, 3])
def test_m2_pieces_sum_and_frozen(d):
    r = m2_limit(d, 1.0, 0.5)
    assert sum(r.pieces.values()) == pytest.approx(r.value, rel=1e-14)
    assert all(v > 0 for v in r.pieces.values())
    # frozen after agreement with a Monte Carlo of the product of span measures
    assert r.value == pytest.approx(M2_FROZEN[d], rel=1e-7)


@pytest.mark.parametrize("d", [2, 3])
def test_m2_literal_form_is_smaller(d):
    lit = m2_limit(d, 1.0, 0.5, form="literal")
    assert lit.value < m2_limit(d, 1.0, 0.5).value
    assert lit.value == pytest.approx({2: 0.31039763140903187, 3: 0.10878925102738858}[d], rel=1e-7)


@pytest.mark.parametrize("d", [2, 3])
def test_m2_decreasing_in_lags(d):
    base = m2_limit(d, 1.0, 0.5).value
    assert m2_limit(d, 2.0, 0.5).value < base
    assert m2_limit(d, 1.0, 1.0).value < base
    assert m2_limit(d, 0.5, 0.5).value > base


def test_m2_tolerance_halving():
    a = m2_limit(2, 1.0, 0.5, QuadratureConfig(rel_tol=1e-8)).value
    b = m2_limit(2, 1.0, 0.5, QuadratureConfig(rel_tol=1e-8).halved()).value
    assert abs(a - b) <= 1e-8 * abs(b)


def test_m2_reports_nonconvergence():
    with pytest.raises(NonConvergenceError):
        m2_limit(2, 1.0, 0.5, QuadratureConfig(max_subdivisions=2))


@pytest.mark.parametrize("d", [2, 3])
def test_case3_bound_dominates(d):
    assert case3_integral(d, 1.0, 0.5) <= case3_upper_bound(d, 1.0, 0.5).value


# Independent 2-D tanh-sinh quadrature (mpmath) of the energy kernel,
# with a power substitution near the diagonal for the x^-3/4 case.
ENERGY_FROZEN = {(2, 0.0): 0.635257312767721, (2, 0.25): 0.918033361080926,
                 (3, 0.0): 0.123460669782326, (3, 0.25): 0.264022070600732}


@pytest.mark.parametrize("key", sorted(ENERGY_FROZEN))
def test_energy_against_frozen_oracle(key):
    d, alpha = key
    assert energy_bound(d, 1.0, alpha).value == pytest.approx(ENERGY_FROZEN[key], rel=1e-8)


@pytest.mark.parametrize("d", [2, 3])
def test_energy_monotone(d):
    thr = energy_threshold(d)
    by_alpha = [energy_bound(d, 1.0, f * thr).value for f in (0, 0.3, 0.6, 0.9)]
    assert all(x < y for x, y in zip(by_alpha, by_alpha[1:]))
    by_l = [energy_bound(d, l, 0.3 * thr).value for l in (0.5, 1.0, 2.0)]
    assert all(x > y for x, y in zip(by_l, by_l[1:]))
    with pytest.raises(ValueError):
        energy_bound(d, 1.0, thr)
    with pytest.raises(ValueError):
        energy_bound(d, 0.0, 0.0)


def test_mc_saturated_ball_counts_all_pairs():
    # with eps beyond any displacement the sum is (xi - a)_+^2 / 2, of mean e^-a
    e = mc_span_measure(2, 1.0, 100.0, 5e-3, 20_000, 3)
    assert e.estimate * 100.0 ** 2 == pytest.approx(math.exp(-1), abs=4 * e.std_error * 100.0 ** 2)


def test_mc_far_lag_is_zero():
    assert mc_span_measure(2, 50.0, 0.05, 5e-4, 20, 0).estimate == 0.0


def test_mc_thread_invariant_and_validated():
    a = mc_span_measure(3, 0.5, 0.1, 2e-3, 200, 4)
    b = mc_span_measure(3, 0.5, 0.1, 2e-3, 200, 4, threads=3)
    assert a.estimate == b.estimate
    with pytest.raises(ValueError):
        mc_span_measure(2, 1.0, 0.05, 1e-3, 10, 0)
    with pytest.raises(ValueError):
        mc_span_measure(2, 0.5, 0.05, 5e-4, 10, 0, mode="product", b=1.0, delta=0.05)
