"""Exit-criteria checks shared by the test suite and `spanset repro`.

Each check returns a CheckResult; none of them raises on a failed criterion.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

from . import rng as _rng
from .dimension import DimensionConfig, dimension_pipeline
from .intervals import IntervalSet
from .metric import ConvergenceConfig, convergence_experiment, hausdorff_distance
from .moments import (QuadratureConfig, energy_bound, energy_threshold, m1_asymptotic, m1_exact, m2_limit,
                      mc_span_measure)
from .paths import PiecewiseLinearPath, gen_gaussian_path, gen_srw
from .spans import eps_cover, min_lag_distances, span_lattice, span_lattice_oracle, span_pl_1d, spans_from_excursions
from .special import exp1
from .stats import (es1_bounds, estimate_es1, estimate_r0, f_cdf, f_cdf_quadrature, ks_distance_unit,
                    sample_first_match)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"AC{self.number:<2d} {'PASS' if self.passed else 'FAIL'}  {self.title}  ({self.seconds:.1f} s)"

    def to_json_obj(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "seconds": self.seconds, "detail": self.detail}


def _best_time(fn: Callable, repeat: int = 20) -> float:
    fn()
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


# ------------------------------------------------------------------ fixtures
def ex2_path() -> PiecewiseLinearPath:
    return PiecewiseLinearPath.from_breakpoints([(0, 0), (0.25, 0.25), (0.75, -0.25), (1, 0)])


def ex2_perturbed(n: int) -> PiecewiseLinearPath:
    return PiecewiseLinearPath.from_breakpoints([(0, 0), (0.25, 0.25), (0.75, -0.25), (1, -1 / (4 * n))])


def tent(k: int) -> tuple[float, float]:
    """Zeros of the k-th positive tent of the infinite-tent example path on [0, 6]."""
    if k == 1:
        return 0.0, 2.0
    if k == 2:
        return 4.0, 4.5
    return 6.0 - 2.0 ** -(k - 3), 6.0 - 3.0 * 2.0 ** -(k - 1)


def tent_formula(n_max: int) -> IntervalSet:
    """[0,5/2] u [4,9/2] u {6} plus the n = 3..n_max families of intervals near 4 and 6."""
    items = [(0.0, 2.5), (4.0, 4.5), (6.0, 6.0)]
    for n in range(3, n_max + 1):
        items.append((4 - 2.0 ** -(n - 3), 4 - 3 * 2.0 ** -(n - 1)))
        items.append((6 - 2.0 ** -(n - 3), 6 - 3 * 2.0 ** -(n - 1)))
    return IntervalSet.from_intervals(items)


# ------------------------------------------------------------------- checks
def check_1() -> CheckResult:
    t0 = time.perf_counter()
    f = span_pl_1d(ex2_path())
    want_f = IntervalSet(np.array([[0.0, 0.5], [1.0, 1.0]]))
    want_fn = IntervalSet(np.array([[0.0, 0.5]]))
    fns = {n: span_pl_1d(ex2_perturbed(n)) for n in (2, 4, 8, 16)}
    dh = hausdorff_distance(fns[4], f)
    secs = _best_time(lambda: hausdorff_distance(span_pl_1d(ex2_perturbed(4)), span_pl_1d(ex2_path())))
    ok = f == want_f and all(s == want_fn for s in fns.values()) and dh == 0.5 and secs < 1e-3
    return CheckResult(1, "exact span of the gap example and its perturbation", ok,
                       {"span_f": str(f), "span_fn": {n: str(s) for n, s in fns.items()}, "d_H": dh,
                        "seconds_per_call": secs}, time.perf_counter() - t0)


def check_2() -> CheckResult:
    t0 = time.perf_counter()
    pairs = {2: spans_from_excursions(tent(1), tent(2))}
    for n in range(3, 9):
        pairs[n] = spans_from_excursions(tent(1), tent(n))
    ok = pairs[2] == IntervalSet(np.array([[2.0, 2.5], [4.0, 4.5]]))
    for n in range(3, 9):
        want = IntervalSet(np.array([[4 - 2.0 ** -(n - 3), 4 - 3 * 2.0 ** -(n - 1)],
                                     [6 - 2.0 ** -(n - 3), 6 - 3 * 2.0 ** -(n - 1)]]))
        ok &= pairs[n] == want
    union = spans_from_excursions(tent(1))
    for s in pairs.values():
        union = union.union(s)
    # 6 is the span of the endpoints, where the path is 0 at both ends
    union = union.union(IntervalSet.from_points([6.0]))
    ok &= union == tent_formula(8)

    def run():
        u = spans_from_excursions(tent(1))
        for n in range(2, 9):
            u = u.union(spans_from_excursions(tent(1), tent(n)))
        return u

    secs = _best_time(run)
    ok &= secs < 1e-3
    return CheckResult(2, "two-excursion spans of the infinite-tent example", bool(ok),
                       {"union": str(union), "seconds_per_call": secs}, time.perf_counter() - t0)


def check_3(n_walks: int = 500, max_steps: int = 2000, seed: int = 3) -> CheckResult:
    t0 = time.perf_counter()
    g = _rng.generator(seed)
    bad = 0
    for d in (1, 2, 3):
        for r in range(n_walks):
            w = gen_srw(d, int(g.integers(1, max_steps + 1)), _rng.mix64(seed, 10_000 * d + r))
            bad += span_lattice(w) != span_lattice_oracle(w)
    secs = time.perf_counter() - t0
    return CheckResult(3, "lattice spans equal the brute-force oracle", bad == 0 and secs < 10,
                       {"mismatches": int(bad), "walks": 3 * n_walks}, secs)


@njit(cache=True)
def _grid_oracle(W):
    n = W.shape[0] - 1
    certified = np.zeros(n + 1, dtype=np.bool_)
    minabs = np.full(n + 1, np.inf)
    certified[0] = True
    minabs[0] = 0.0
    for j in range(1, n + 1):
        best = np.inf
        prev = W[j] - W[0]
        for k in range(n - j + 1):
            g = W[k + j] - W[k]
            ag = abs(g)
            if ag < best:
                best = ag
            if g == 0.0 or (k > 0 and (g > 0) != (prev > 0)):
                certified[j] = True
            prev = g
        minabs[j] = best
    return certified, minabs


def random_pl_path(g: np.random.Generator, pieces: int = 200) -> PiecewiseLinearPath:
    """Random path on [0, 1]; some draws use dyadic times and coarse values to force flats and ties."""
    kind = g.integers(0, 3)
    if kind == 0:
        t = np.sort(g.uniform(0, 1, pieces - 1))
        t = np.concatenate(([0.0], t, [1.0]))
    else:
        t = np.concatenate(([0], np.sort(g.choice(np.arange(1, 4096), pieces - 1, replace=False)), [4096])) / 4096.0
    v = np.concatenate(([0.0], np.cumsum(g.standard_normal(pieces) * np.sqrt(np.diff(t)))))
    if kind == 2:
        v = np.round(v * 16) / 16
    return PiecewiseLinearPath(t, v)


def check_4(n_paths: int = 100, resolution: float = 1e-4, seed: int = 4) -> CheckResult:
    t0 = time.perf_counter()
    g = _rng.generator(seed)
    n = int(round(1 / resolution))
    grid = np.arange(n + 1) * resolution
    missed = 0
    spurious = 0
    for _ in range(n_paths):
        p = random_pl_path(g)
        S = span_pl_1d(p)
        W = p(grid)
        certified, minabs = _grid_oracle(W)
        lip = float(np.max(np.abs(np.diff(p.values) / np.diff(p.times))))
        lags = grid
        # no false exclusions: every lag with a sign change on the grid is a span
        missed += int(np.sum(certified & ~S.contains(lags, tol=1e-12)))
        possible = minabs <= 3 * lip * resolution + 1e-12
        near = possible.copy()
        near[1:] |= possible[:-1]
        near[:-1] |= possible[1:]
        touched = S.distance_to(lags) <= resolution / 2
        spurious += int(np.sum(touched & ~near))
    secs = time.perf_counter() - t0
    return CheckResult(4, "PL spans agree with a dense grid oracle", missed == 0 and spurious == 0 and secs < 30,
                       {"false_exclusions": missed, "inclusions_beyond_one_cell": spurious, "paths": n_paths}, secs)


def check_5(n: int = 2000, walk_steps: int = 10 ** 6, reps: int = 10 ** 4, seed: int = 5) -> CheckResult:
    t0 = time.perf_counter()
    c1 = f_cdf(1.0)
    ok1 = abs(c1 - (0.5 + 1 / math.pi)) <= 1e-12
    pts = _rng.generator(seed).uniform(0, 1, 100)
    qerr = max(abs(f_cdf(t) - f_cdf_quadrature(t)) for t in pts)
    F = sample_first_match(n, reps, walk_steps, seed, upto=1.0)
    x = np.where(F < 0, np.inf, F / n)
    ks = ks_distance_unit(x)
    ok = ok1 and qerr <= 1e-10 and ks <= 0.03
    return CheckResult(5, "law of the first-match time", ok,
                       {"f_cdf(1)": c1, "max_quadrature_gap": qerr, "ks_distance": ks}, time.perf_counter() - t0)


def check_6(reps: int = 10 ** 4, walk_steps: int = 2 ** 15, seed: int = 6) -> CheckResult:
    t0 = time.perf_counter()
    a = estimate_es1("formula", reps, walk_steps, seed)
    b = estimate_es1("direct", reps, walk_steps, seed)
    se = math.hypot(a.std_error, b.std_error)
    ok = 0.63 <= a.estimate <= 0.77 and 0.63 <= b.estimate <= 0.77 and abs(a.estimate - b.estimate) <= 3 * se
    return CheckResult(6, "E S_1 by first-match formula and by direct span measure", ok,
                       {"formula": a.to_json_obj(), "direct": b.to_json_obj(),
                        "gap_in_combined_se": abs(a.estimate - b.estimate) / se}, time.perf_counter() - t0)


def check_7(reps: int = 10 ** 4, walk_steps: int = 10 ** 4, seed: int = 7) -> CheckResult:
    t0 = time.perf_counter()
    e = estimate_r0(reps, walk_steps, seed)
    ok = abs(e.estimate - 0.2869) <= 0.02
    return CheckResult(7, "mean longest zero excursion R0/N against 0.2869", ok,
                       {"estimate": e.estimate, "std_error": e.std_error, "target": 0.2869, "tolerance": 0.02},
                       time.perf_counter() - t0)


def check_8() -> CheckResult:
    t0 = time.perf_counter()
    lo, hi = es1_bounds()
    secs = time.perf_counter() - t0
    ok = abs(lo - 0.655) <= 5e-4 and abs(hi - 0.746) <= 5e-4 and secs < 1
    return CheckResult(8, "bounding integrals for E S_1", ok, {"lower": lo, "upper": hi}, secs)


def check_9(reps: int = 10_000, seed: int = 9) -> CheckResult:
    t0 = time.perf_counter()
    a2 = m1_asymptotic(2, 1.0)
    a3 = m1_asymptotic(3, 1.0)
    o2 = exp1(1.0) / 2
    o3 = (2 * math.exp(-1) - 2 * math.sqrt(math.pi) * math.erfc(1.0)) / (2 ** 1.5 * math.gamma(2.5))
    ex = m1_exact(2, 1.0, 0.05).diagnostics["scaled"]
    mc = mc_span_measure(2, 1.0, 0.05, 5e-4, reps, seed)
    ok = abs(a2 - o2) <= 1e-8 and abs(a3 - o3) <= 1e-8 and abs(mc.estimate - ex) <= 3 * mc.std_error
    return CheckResult(9, "first moment: special-function oracles and simulation", ok,
                       {"m1_asymptotic_2": a2, "oracle_2": o2, "m1_asymptotic_3": a3, "oracle_3": o3,
                        "m1_exact_scaled": ex, "mc": mc.to_json_obj()}, time.perf_counter() - t0)


def check_10(reps: dict = None, seed: int = 10) -> CheckResult:
    t0 = time.perf_counter()
    reps = reps or {2: 50_000, 3: 100_000}
    detail = {}
    ok = True
    for d in (2, 3):
        r1 = m2_limit(d, 1.0, 0.5, QuadratureConfig(rel_tol=1e-8))
        r2 = m2_limit(d, 1.0, 0.5, QuadratureConfig(rel_tol=5e-9))
        drift = abs(r1.value - r2.value) / abs(r2.value)
        mc = mc_span_measure(d, 1.0, 0.05, 5e-4, reps[d], seed, mode="product", b=0.5, delta=0.05)
        rel = abs(mc.estimate - r2.value) / r2.value
        ok &= math.isfinite(r2.value) and drift <= 1e-8 and rel <= 0.15
        detail[f"d{d}"] = {"limit": r2.value, "pieces": r2.pieces, "tolerance_drift": drift,
                          "mc": mc.to_json_obj(), "relative_gap": rel}
    return CheckResult(10, "second-moment limits: convergence and simulation", bool(ok), detail,
                       time.perf_counter() - t0)


def check_11(l: float = 1.0) -> CheckResult:
    t0 = time.perf_counter()
    ok = True
    detail = {}
    for d in (2, 3):
        thr = energy_threshold(d)
        try:
            energy_bound(d, l, thr)
            ok = False
        except ValueError:
            pass
        alphas = [0.0, 0.25 * thr, 0.5 * thr, 0.75 * thr, 0.99 * thr]
        vals = [energy_bound(d, l, a).value for a in alphas]
        ok &= all(math.isfinite(v) for v in vals) and all(np.diff(vals) > 0)
        detail[f"d{d}"] = {"alphas": alphas, "values": vals, "threshold": thr}
    secs = time.perf_counter() - t0
    return CheckResult(11, "energy bound threshold and monotonicity in alpha", bool(ok and secs < 60), detail, secs)


def check_12(seed: int = 12) -> CheckResult:
    t0 = time.perf_counter()
    r2 = dimension_pipeline(DimensionConfig(2), seed)
    r3 = dimension_pipeline(DimensionConfig(3), seed)
    ok = 0.85 <= r2.mean_slope <= 1.15 and 0.35 <= r3.mean_slope <= 0.65
    return CheckResult(12, "box-count slopes of lattice spans", ok, {"d2": r2.to_json_obj(), "d3": r3.to_json_obj()},
                       time.perf_counter() - t0)


EPS_LEVELS = (0.1, 0.05, 0.025, 0.0125)


def eps_span_medians(d: int, seed: int, n_seeds: int = 20, horizon: float = 10.0, grid_step: float = 1e-3,
                     window=(0.05, 1.0), eps_levels=EPS_LEVELS) -> np.ndarray:
    meas = []
    for s in _rng.replicate_seeds(seed, n_seeds):
        path = gen_gaussian_path(d, horizon, grid_step, s)
        lags, dist = min_lag_distances(path, window)
        meas.append([eps_cover(lags, dist, e, grid_step, window).measure() for e in eps_levels])
    return np.median(np.asarray(meas), axis=0)


def check_13(seed: int = 13) -> CheckResult:
    t0 = time.perf_counter()
    width = 0.95
    m2 = eps_span_medians(2, seed)
    m1 = eps_span_medians(1, seed)
    ok = bool(np.all(np.diff(m2) < 0) and np.all(m1 >= 0.98 * width))
    return CheckResult(13, "eps-span measure shrinks in the plane, fills the window on the line", ok,
                       {"eps": list(EPS_LEVELS), "median_d2": m2.tolist(), "median_d1": m1.tolist()},
                       time.perf_counter() - t0)


def check_14(seed: int = 14) -> CheckResult:
    t0 = time.perf_counter()
    rows = convergence_experiment(ConvergenceConfig(), seed)
    med = [r.median for r in rows]
    ok = bool(np.all(np.diff(med) < 0))
    return CheckResult(14, "Knight-coupled Hausdorff distances decrease with level (evidence only)", ok,
                       {"levels": [r.level for r in rows], "median": med, "q25": [r.q25 for r in rows],
                        "q75": [r.q75 for r in rows]}, time.perf_counter() - t0)


CHECKS = {i: globals()[f"check_{i}"] for i in range(1, 15)}


def run_checks(numbers=None, echo: Callable[[str], None] = print) -> list[CheckResult]:
    out = []
    for i in numbers or sorted(CHECKS):
        r = CHECKS[i]()
        echo(r.line())
        out.append(r)
    return out
