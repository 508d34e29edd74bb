import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from spanset.acceptance import ex2_path, ex2_perturbed, random_pl_path
from spanset.intervals import IntervalSet
from spanset.paths import LatticePath, PiecewiseLinearPath, gen_gaussian_path, gen_srw, to_pl
from spanset.spans import (covered_cells, eps_cover, eps_span_grid, min_lag_distances, span_lattice,
                           span_lattice_oracle, span_pl_1d, spans_from_excursions, walk_span_measure)
from spanset import rng

seeds = st.integers(0, 2 ** 64 - 1)


def test_gap_example():
    assert span_pl_1d(ex2_path()) == IntervalSet(np.array([[0, 0.5], [1, 1]]))
    for n in (2, 3, 10, 1000):
        assert span_pl_1d(ex2_perturbed(n)) == IntervalSet(np.array([[0, 0.5]]))


def test_flat_piece_gives_its_length():
    p = PiecewiseLinearPath([0, 1, 3, 4], [0, 1, 1, 3])
    # the flat piece [1,3] at height 1 and the rise through 1 at t=1
    assert span_pl_1d(p) == IntervalSet.from_intervals([(0, 2)])


def test_equal_slopes_give_a_point():
    # two parallel rises through the same band: only their shift is a span
    p = PiecewiseLinearPath([0, 1, 2, 3], [0, 1, 0, 1])
    assert span_pl_1d(p) == IntervalSet.from_intervals([(0, 2)])
    q = PiecewiseLinearPath([0, 1, 5, 6], [0, 1, 10, 11])
    assert span_pl_1d(q) == IntervalSet.from_intervals([(0, 0)])


@given(seeds, st.integers(1, 600), st.integers(0, 6))
def test_routes_agree_on_dyadic_scales(seed, n, k):
    path = to_pl(gen_srw(1, n, seed), 2.0 ** -k)
    assert span_pl_1d(path, "generic") == span_pl_1d(path, "lattice")


@given(seeds, st.integers(1, 600))
def test_routes_agree_on_other_scales(seed, n):
    path = to_pl(gen_srw(1, n, seed), 1.0 / n)
    assert span_pl_1d(path, "generic").allclose(span_pl_1d(path, "lattice"), atol=1e-12)


@given(seeds, st.integers(1, 500))
def test_lattice_spans_inside_pl_spans(seed, n):
    w = gen_srw(1, n, seed)
    pl = span_pl_1d(to_pl(w))
    lat = span_lattice(w).lags
    assert np.all(pl.contains(lat))
    # even lags are spans of the interpolation exactly when they are lattice spans
    even = np.arange(0, n + 1, 2)
    assert np.array_equal(even[pl.contains(even)], lat)


def test_odd_lag_of_interpolation_is_not_a_lattice_span():
    w = LatticePath([0, 1, 0])
    assert 1 not in span_lattice(w)
    assert span_pl_1d(to_pl(w)).contains(1.0)


@given(seeds, st.integers(1, 400), st.sampled_from([1, 2, 3]))
def test_lattice_matches_oracle(seed, n, d):
    w = gen_srw(d, n, seed)
    assert span_lattice(w) == span_lattice_oracle(w)


@given(seeds, st.integers(1, 2000), st.integers(0, 5))
def test_walk_measure_matches_sweep(seed, n, k):
    w = gen_srw(1, n, seed)
    ts = 2.0 ** -k
    assert walk_span_measure(w, ts) == span_pl_1d(to_pl(w, ts)).measure()
    assert covered_cells(w).shape == (n,)


@st.composite
def pl_paths(draw):
    g = rng.generator(draw(seeds))
    return random_pl_path(g, draw(st.integers(2, 60)))


@given(pl_paths(), st.floats(0.1, 10))
def test_time_scaling(p, c):
    assert span_pl_1d(p.time_scaled(c)).allclose(span_pl_1d(p).scaled(c), atol=1e-9 * c)


@given(pl_paths())
def test_reflection_and_reversal(p):
    S = span_pl_1d(p)
    assert span_pl_1d(p.negated()) == S
    assert span_pl_1d(p.reversed()).allclose(S, atol=1e-12)


@given(pl_paths(), st.data())
def test_prefix_monotone(p, data):
    k = data.draw(st.integers(1, p.n_pieces))
    short = span_pl_1d(p.prefix_until(k))
    full = span_pl_1d(p)
    assert full.union(short).allclose(full, atol=1e-12)


@given(pl_paths())
def test_merge_idempotent(p):
    S = span_pl_1d(p)
    assert S.merged(0.0) == S
    assert S.min() == 0.0 and S.max() <= p.horizon


def test_eps_spans_monotone_in_eps():
    path = gen_gaussian_path(2, 2.0, 1e-3, 8)
    lags, dist = min_lag_distances(path, (0.05, 1.0))
    sets = [eps_cover(lags, dist, e, 1e-3, (0.05, 1.0)) for e in (0.01, 0.03, 0.1, 0.3)]
    for a, b in zip(sets, sets[1:]):
        assert b.union(a) == b
    assert sets[-1].measure() <= 0.95 + 1e-12


def test_eps_spans_of_line_fill_window():
    path = gen_gaussian_path(1, 10.0, 1e-3, 2)
    assert eps_span_grid(path, 0.01, (0.05, 1.0)).measure() == pytest.approx(0.95)


def test_eps_min_distance_brute_force():
    path = gen_gaussian_path(3, 0.2, 1e-2, 1)
    lags, dist = min_lag_distances(path, (0.01, 0.1))
    v = path.values
    for h, dd in zip(np.rint(lags / 1e-2).astype(int), dist):
        assert dd == pytest.approx(min(np.linalg.norm(v[s + h] - v[s]) for s in range(len(v) - h)))


def test_window_validation():
    path = gen_gaussian_path(2, 1.0, 1e-2, 0)
    with pytest.raises(ValueError):
        eps_span_grid(path, 0.1, (0.0, 0.5))
    with pytest.raises(ValueError):
        eps_span_grid(path, 0.1, (0.1, 2.0))


def test_two_excursion_spans():
    S = spans_from_excursions((0, 2), (4, 4.5))
    assert S == IntervalSet.from_intervals([(2, 2.5), (4, 4.5)])
    assert spans_from_excursions((1, 3)) == IntervalSet.from_intervals([(0, 2)])
    with pytest.raises(ValueError):
        spans_from_excursions((0, 2), (1, 3))


def test_excursion_spans_are_true_spans():
    # a path with excursions above 0 on (0,2) and (4,4.5): each predicted lag is realised
    p = PiecewiseLinearPath([0, 1, 2, 3, 4, 4.25, 4.5], [0, 1, 0, -1, 0, 0.25, 0])
    S = span_pl_1d(p)
    pred = spans_from_excursions((0, 2), (4, 4.5))
    grid = np.linspace(0, 4.5, 901)
    assert np.all(S.contains(grid[pred.contains(grid)], tol=1e-12))
