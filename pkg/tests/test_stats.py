import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from spanset.intervals import IntervalSet
from spanset.paths import LatticePath, gen_srw
from spanset.stats import (F_TAIL, EstimateSummary, capacity_estimate, es1_bounds, estimate_es1, f_cdf,
                           f_cdf_quadrature, f_pdf, first_match_lazy, first_match_time, ks_distance_unit,
                           longest_excursions, measure_stats, sample_first_match)


def test_f_law_endpoints():
    assert f_cdf(0.0) == 0.0
    assert f_cdf(1.0) == pytest.approx(0.5 + 1 / math.pi, abs=1e-15)
    assert F_TAIL == pytest.approx(1 - f_cdf(1.0), abs=1e-15)


@given(st.floats(0, 1), st.floats(0, 1))
def test_f_cdf_monotone_and_matches_quadrature(s, t):
    lo, hi = sorted((s, t))
    assert f_cdf(lo) <= f_cdf(hi) + 1e-15
    assert f_cdf(t) == pytest.approx(f_cdf_quadrature(t), abs=1e-12)


def test_density_integrates_to_cdf():
    val, _ = integrate.quad(f_pdf, 0, 0.5, limit=200)
    assert val == pytest.approx(f_cdf(0.5), abs=1e-9)
    with pytest.raises(ValueError):
        f_cdf(1.5)


def test_es1_bounds_frozen():
    lo, hi = es1_bounds()
    # independent: 2D midpoint-free closed form for the lower bound is not known; Simpson on t in [0,1]
    # after u = sqrt(t) gives the same digits
    u = np.linspace(0, 1, 20001)
    simpson = integrate.simpson(2 * np.sqrt(2 - u * u) / (math.pi * (1 + u * u)), x=u)
    assert lo == pytest.approx(simpson, abs=1e-12)
    assert lo == pytest.approx(0.6547005383792516, abs=1e-13)
    assert hi == pytest.approx(0.7455455952873562, abs=1e-13)


def test_first_match_small_cases():
    w = LatticePath([0, 1, 2, 3, 2, 1, 2])
    assert first_match_time(w, 2) == 2  # x[2] = x[4] = 2
    assert first_match_time(w, 4) == 1  # x[1] = x[5] = 1
    assert first_match_time(LatticePath([0, 1, 2, 3, 4]), 2) is None
    with pytest.raises(ValueError):
        first_match_time(w, 3)


@given(st.integers(0, 2 ** 63), st.sampled_from([2, 4, 10, 50]), st.integers(200, 3000))
def test_lazy_search_equals_full_scan(seed, n, steps):
    full = first_match_time(gen_srw(1, steps, seed), n)
    lazy = first_match_lazy(n, seed, steps, start_steps=n + 1)
    assert lazy == (-1 if full is None else full)


@given(st.integers(0, 2 ** 63), st.integers(1, 40))
def test_first_match_stable_under_extension(seed, half):
    n = 2 * half
    a = first_match_time(gen_srw(1, 500, seed), n)
    b = first_match_time(gen_srw(1, 5000, seed), n)
    if a is not None:
        assert a == b


def test_sample_first_match_thread_invariant():
    a = sample_first_match(20, 300, 2000, 9)
    b = sample_first_match(20, 300, 2000, 9, threads=3)
    assert np.array_equal(a, b)


def test_ks_against_exact_law():
    # inverse-CDF samples from the exact law have small KS distance
    g = np.random.default_rng(0)
    u = g.uniform(size=20000)
    grid = np.linspace(0, 1, 200001)
    cdf = f_cdf(grid)
    x = np.where(u < cdf[-1], np.interp(u, cdf, grid), 2.0)
    assert ks_distance_unit(x) < 0.015


def test_longest_excursions():
    w = LatticePath([0, 1, 2, 1, 0, 1, 0])
    assert longest_excursions(w) == (4, 4)
    w = LatticePath([0, 1, 2, 3, 2, 3, 4, 5, 4, 3])
    assert longest_excursions(w) == (4, 0)


def test_measure_stats():
    S = IntervalSet.from_intervals([(0, 0.5), (0.7, 0.8)])
    assert measure_stats(S, 1.0) == pytest.approx((0.6, 0.5))
    with pytest.raises(ValueError):
        measure_stats(S, 0.75)


def test_single_replicate_is_flagged():
    e = EstimateSummary.from_samples([0.3])
    assert e.std_error == 0 and e.diagnostics["single_replicate"]


def test_capacity_of_small_lags_is_one():
    e = capacity_estimate(IntervalSet.from_intervals([(0.0, 0.01)]), 50, 1000, 3)
    assert e.estimate == 1.0


def test_capacity_of_full_range_is_one_and_far_lags_rarer():
    far = capacity_estimate(IntervalSet.from_intervals([(0.95, 1.0)]), 400, 2000, 3)
    assert 0 < far.estimate < 1


def test_es1_estimators_in_range():
    f = estimate_es1("formula", 400, 4096, 1)
    assert 0.6 < f.estimate < 0.85
    assert f.diagnostics["lag"] % 2 == 0
    with pytest.raises(ValueError):
        estimate_es1("other", 10, 100, 0)


def test_direct_estimator_bias_shrinks_with_walk_length():
    coarse = estimate_es1("direct", 2000, 2 ** 8, 5)
    fine = estimate_es1("direct", 2000, 2 ** 14, 5)
    lo, hi = es1_bounds()
    # the same seeds drive both lengths, so the paired gap is resolved well
    assert coarse.estimate < fine.estimate
    assert lo < fine.estimate < hi
