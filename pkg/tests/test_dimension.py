import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanset.dimension import (BoxCountTable, DimensionConfig, box_count, dimension_pipeline, dyadic_scales,
                               fit_dimension)
from spanset.intervals import IntervalSet
from spanset.spans import SpanSet

WINDOW = (2.0 ** -4, 1.0)
SCALES = dyadic_scales(4, 14)


def test_full_interval_has_slope_one():
    t = box_count(IntervalSet.from_intervals([(0, 1)]), WINDOW, SCALES)
    assert fit_dimension(t, (2.0 ** -14, 2.0 ** -8))[0] == pytest.approx(1.0, abs=1e-3)
    # [1/16, 1] at scale 2^-k meets 2^k - 2^(k-4) + 1 boxes (the last box holds only 1)
    assert t.counts == tuple(2 ** k - 2 ** (k - 4) + 1 for k in range(4, 15))


def test_single_point_has_slope_zero():
    t = box_count(IntervalSet.from_points([0.3]), WINDOW, SCALES)
    assert set(t.counts) == {1}
    assert fit_dimension(t) == (0.0, 1.0)


def test_harmonic_points_have_slope_half():
    # {1/n} has box dimension 1/2; the window stays far below the scales in use
    pts = 1.0 / np.arange(1, 10 ** 6 + 1)
    t = box_count(IntervalSet.from_points(pts), (1e-6, 1.0), dyadic_scales(10, 20))
    slope, r2 = fit_dimension(t, (2.0 ** -20, 2.0 ** -12))
    assert slope == pytest.approx(0.5, abs=0.05)


@given(st.lists(st.integers(1, 4000), min_size=1, max_size=200, unique=True))
def test_spanset_exact_route_matches_float_route(lags):
    N = 4096
    sp = SpanSet(np.array([0] + sorted(lags)), N)
    a = box_count(sp, (1 / 64, 1.0), SCALES)
    b = box_count(sp.to_points(1.0 / N), (1 / 64, 1.0), SCALES)
    assert a.counts == b.counts


@given(st.lists(st.tuples(st.floats(0.05, 0.9), st.floats(0, 0.05)), min_size=1, max_size=20),
       st.lists(st.tuples(st.floats(0.05, 0.9), st.floats(0, 0.05)), max_size=20))
def test_counts_monotone_under_inclusion(p, q):
    A = IntervalSet.from_intervals([(a, a + w) for a, w in p])
    B = A.union(IntervalSet.from_intervals([(a, a + w) for a, w in q])) if q else A
    ca = box_count(A, (0.05, 1.0), SCALES).counts
    cb = box_count(B, (0.05, 1.0), SCALES).counts
    assert all(x <= y for x, y in zip(ca, cb))


def test_dyadic_scaling_shifts_counts():
    pts = np.random.default_rng(0).uniform(0.25, 0.5, 300)
    A = IntervalSet.from_points(pts)
    a = box_count(A, (0.25, 0.5), dyadic_scales(4, 12)).counts
    b = box_count(A.scaled(2.0), (0.5, 1.0), dyadic_scales(3, 11)).counts
    assert a == b


def test_validation():
    with pytest.raises(ValueError):
        box_count(IntervalSet.from_points([0.5]), (0.0, 1.0), SCALES)
    with pytest.raises(ValueError):
        box_count(IntervalSet.from_points([0.5]), WINDOW, [0.3])
    t = BoxCountTable((0.5, 0.25), (1, 0), WINDOW)
    with pytest.raises(ValueError):
        fit_dimension(t)
    with pytest.raises(ValueError):
        BoxCountTable((0.25, 0.5), (1, 1), WINDOW)


def test_csv_layout():
    t = box_count(IntervalSet.from_intervals([(0.1, 0.2)]), WINDOW, dyadic_scales(4, 5))
    assert t.to_csv().splitlines() == ["scale,count", "0.0625,3", "0.03125,4"]


def test_pipeline_small_and_thread_invariant():
    cfg = DimensionConfig(2, n_steps=50_000, n_seeds=4, scale_exponents=(4, 10), fit_exponents=(5, 9))
    a = dimension_pipeline(cfg, 1)
    b = dimension_pipeline(cfg, 1, threads=2)
    assert a.slopes == b.slopes
    assert 0.7 < a.mean_slope < 1.05
