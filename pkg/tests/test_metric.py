import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanset.intervals import IntervalSet
from spanset.metric import ConvergenceConfig, convergence_experiment, hausdorff_distance, rows_to_csv

ivs = st.lists(st.tuples(st.floats(0, 10), st.floats(0, 2)), min_size=1, max_size=8).map(
    lambda p: IntervalSet.from_intervals([(a, a + w) for a, w in p]))


def _dense(S, n=4001):
    """Sample S finely: its endpoints plus grid points inside."""
    g = np.linspace(0, 12, n)
    return np.concatenate((S.lo, S.hi, g[S.contains(g)]))


@given(ivs, ivs)
def test_symmetric_and_zero_on_equal(A, B):
    assert hausdorff_distance(A, B) == hausdorff_distance(B, A)
    assert hausdorff_distance(A, A) == 0


@given(ivs, ivs, ivs)
def test_triangle_inequality(A, B, C):
    assert hausdorff_distance(A, C) <= hausdorff_distance(A, B) + hausdorff_distance(B, C) + 1e-12


@given(ivs, st.floats(0, 15))
def test_adding_a_point(A, x):
    B = A.union(IntervalSet.from_points([x]))
    assert hausdorff_distance(A, B) == pytest.approx(float(A.distance_to(x)))


@given(ivs, ivs)
def test_matches_dense_sampling(A, B):
    a, b = _dense(A), _dense(B)
    approx = max(np.max(B.distance_to(a)), np.max(A.distance_to(b)))
    # sampling misses at most half a grid cell
    assert approx <= hausdorff_distance(A, B) + 1e-12
    assert hausdorff_distance(A, B) <= approx + 12 / 4000 / 2 + 1e-12


def test_example_values():
    A = IntervalSet.from_intervals([(0, 0.5), (1, 1)])
    B = IntervalSet.from_intervals([(0, 0.5)])
    assert hausdorff_distance(A, B) == 0.5
    gap = IntervalSet.from_intervals([(0, 1), (3, 4)])
    assert hausdorff_distance(gap, IntervalSet.from_intervals([(0, 4)])) == 1.0
    with pytest.raises(ValueError):
        hausdorff_distance(A, IntervalSet.empty())


def test_small_convergence_run():
    cfg = ConvergenceConfig(levels=(2, 3, 4), fine_level=7, horizon=2.0, n_seeds=10)
    rows = convergence_experiment(cfg, 1)
    assert [r.level for r in rows] == [2, 3, 4]
    assert all(r.q25 <= r.median <= r.q75 for r in rows)
    assert rows_to_csv(rows).splitlines()[0] == "parameter,median,q25,q75,n_seeds"
    ind = convergence_experiment(ConvergenceConfig(levels=(4,), fine_level=7, n_seeds=10,
                                                   coupling="independent"), 1)
    assert ind[0].median > rows[-1].median
    with pytest.raises(ValueError):
        convergence_experiment(ConvergenceConfig(levels=(7,), fine_level=7), 0)
