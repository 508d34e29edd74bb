"""Span statistics, first-match times and Monte Carlo estimators.

F is the first time the lag-h increment process of a linear Brownian motion
returns to zero, rescaled by h. On [0, 1] its law has density
(1/pi) sqrt((2 - t)/t), and P(F > 1) = 1/2 - 1/pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy import integrate

from . import rng as _rng
from .intervals import IntervalSet
from .paths import LatticePath, gen_srw, to_pl
from .spans import span_pl_1d, walk_span_measure

F_TAIL = 0.5 - 1.0 / math.pi
R0_REFERENCE = 0.2869


@dataclass
class EstimateSummary:
    estimate: float
    std_error: float
    n_replicates: int
    ci95: tuple
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, samples, diagnostics: Optional[dict] = None) -> "EstimateSummary":
        x = np.asarray(samples, dtype=np.float64).ravel()
        if x.size == 0:
            raise ValueError("no replicates")
        diag = dict(diagnostics or {})
        mean = float(x.mean())
        if x.size == 1:
            se = 0.0
            diag["single_replicate"] = True
        else:
            se = float(x.std(ddof=1) / math.sqrt(x.size))
        return cls(mean, se, int(x.size), (mean - 1.96 * se, mean + 1.96 * se), diag)

    def to_json_obj(self) -> dict:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n": self.n_replicates,
            "ci95": list(self.ci95),
            "diagnostics": self.diagnostics,
        }


# ------------------------------------------------------------- law of F
def _check_unit(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if np.any((t < 0) | (t > 1)) or np.any(np.isnan(t)):
        raise ValueError("t must lie in [0, 1]")
    return t


def f_pdf(t):
    t = _check_unit(t)
    with np.errstate(divide="ignore"):
        return np.sqrt((2.0 - t) / t) / math.pi


def f_cdf(t):
    """P(F <= t) for t in [0, 1]."""
    t = _check_unit(t)
    out = (np.sqrt(t * (2.0 - t)) + 2.0 * np.arcsin(np.sqrt(t / 2.0))) / math.pi
    return float(out) if out.ndim == 0 else out


def f_cdf_quadrature(t: float) -> float:
    """P(F <= t) by integrating the density in u = sqrt(s) (removes the 1/sqrt singularity)."""
    t = float(_check_unit(t))
    val, _ = integrate.quad(lambda u: 2.0 * math.sqrt(2.0 - u * u) / math.pi, 0.0, math.sqrt(t),
                            epsabs=1e-14, epsrel=1e-13)
    return val


def es1_bounds() -> tuple[float, float]:
    """Lower and upper bounds on E S_1 = E[1/(1+F)] from the law of F on [0, 1].

    lower = int_0^1 p_F(t)/(1+t) dt; upper adds P(F > 1)/2, since 1/(1+F) < 1/2 there.
    """
    val, _ = integrate.quad(lambda u: 2.0 * math.sqrt(2.0 - u * u) / (math.pi * (1.0 + u * u)), 0.0, 1.0,
                            epsabs=1e-14, epsrel=1e-13)
    return val, val + 0.5 * F_TAIL


def ks_distance_unit(samples) -> float:
    """sup_{t in [0,1]} |empirical CDF - f_cdf| for samples of F (values > 1 allowed)."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    inside = x[x <= 1.0]
    # the supremum is attained at a jump or at t = 1
    emp_hi = np.arange(1, inside.size + 1) / n
    emp_lo = np.arange(0, inside.size) / n
    F = f_cdf(inside) if inside.size else np.empty(0)
    d = 0.0
    if inside.size:
        d = max(float(np.max(np.abs(emp_hi - F))), float(np.max(np.abs(emp_lo - F))))
    return max(d, abs(inside.size / n - f_cdf(1.0)))


# ------------------------------------------------------- span statistics
def measure_stats(spans: IntervalSet, u: float) -> tuple[float, float]:
    """(S, T1): total length of `spans` and right end of the component at 0."""
    if not u > 0:
        raise ValueError("u must be positive")
    if spans.is_empty:
        raise ValueError("span sets contain 0")
    if spans.max() > u:
        raise ValueError(f"span set reaches {spans.max()} beyond u = {u}")
    comp = spans.component_containing(0.0)
    return spans.measure(), (0.0 if comp is None else float(comp[1]))


@njit(cache=True, nogil=True)
def _longest_gaps(x):
    n = x.shape[0]
    lo = x.min()
    last = np.full(x.max() - lo + 1, -1, dtype=np.int64)
    R = 0
    R0 = 0
    for k in range(n):
        v = x[k] - lo
        p = last[v]
        if p >= 0:
            g = k - p
            if g > R:
                R = g
            if x[k] == 0 and g > R0:
                R0 = g
        last[v] = k
    return R, R0


def longest_excursions(walk: LatticePath) -> tuple[int, int]:
    """(R, R0): longest gap between consecutive visits to one level, over all levels and at 0."""
    if walk.dim != 1:
        raise ValueError("excursions are defined for one-dimensional walks")
    R, R0 = _longest_gaps(np.ascontiguousarray(walk.values))
    return int(R), int(R0)


@njit(cache=True, nogil=True)
def _first_match(x, n):
    for k in range(x.shape[0] - n):
        if x[k + n] == x[k]:
            return k
    return -1


def _check_lag(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError("lag must be a positive even integer")
    if n % 2:
        raise ValueError(f"odd lag {n}: x[k+n] = x[k] needs an even number of steps")


def first_match_time(walk: LatticePath, n: int) -> Optional[int]:
    """Smallest k with x[k+n] = x[k]; None when the walk ends first."""
    if walk.dim != 1:
        raise ValueError("first-match times are defined for one-dimensional walks")
    _check_lag(n)
    if n >= len(walk):
        raise ValueError("lag must be shorter than the walk")
    k = _first_match(np.ascontiguousarray(walk.values), int(n))
    return None if k < 0 else int(k)


def first_match_lazy(n: int, seed: int, max_steps: int, start_steps: Optional[int] = None) -> int:
    """F_n of the walk gen_srw(1, max_steps, seed), generating only as much as needed.

    Walks with the same seed share prefixes, so the search doubles the generated
    length until a match appears. Returns -1 when none occurs within max_steps.
    """
    _check_lag(n)
    if n >= max_steps:
        raise ValueError("lag must be shorter than the walk")
    steps = min(max_steps, start_steps or 4 * n)
    scanned = 0
    while True:
        x = gen_srw(1, steps, seed).values
        # only new starting points need checking
        k = _first_match(x[scanned:], n)
        if k >= 0:
            return scanned + k
        if steps == max_steps:
            return -1
        scanned = steps - n + 1
        steps = min(max_steps, 2 * steps)


def sample_first_match(n: int, n_replicates: int, walk_steps: int, seed: int, threads: int = 1,
                       upto: Optional[float] = None) -> np.ndarray:
    """F_n for replicate walks keyed by mix64(seed, r); -1 marks no match within walk_steps.

    With `upto`, the search stops once F_n/n > upto and records the cap instead;
    the value is then only known to exceed `upto`.
    """
    limit = walk_steps
    if upto is not None:
        limit = min(walk_steps, int(math.floor(upto * n)) + n + 1)
    seeds = _rng.replicate_seeds(seed, n_replicates)
    out = _rng.map_ordered(lambda s: first_match_lazy(n, s, limit), seeds, threads)
    return np.asarray(out, dtype=np.int64)


# ------------------------------------------------------------ estimators
def default_es1_lag(walk_steps: int) -> int:
    n = walk_steps // 10
    return max(2, n - (n % 2))


def estimate_es1(method: str, n_replicates: int, walk_steps: int, seed: int,
                 lag: Optional[int] = None, threads: int = 1) -> EstimateSummary:
    """E S_1 estimated two ways.

    "formula": mean of 1/(1 + F_n/n) over walks; a walk without a match
    contributes 1/(1 + cap) with cap = (walk_steps - n)/n.
    "direct": mean Lebesgue measure of the span set of the walk interpolated
    onto [0, 1].
    """
    if n_replicates < 1 or walk_steps < 2:
        raise ValueError("need n_replicates >= 1 and walk_steps >= 2")
    seeds = _rng.replicate_seeds(seed, n_replicates)
    diag = {"method": method, "walk_steps": int(walk_steps)}
    if method == "formula":
        n = default_es1_lag(walk_steps) if lag is None else int(lag)
        _check_lag(n)
        F = np.asarray(_rng.map_ordered(lambda s: first_match_lazy(n, s, walk_steps), seeds, threads))
        cap = (walk_steps - n) / n
        ratio = np.where(F < 0, cap, F / n)
        vals = 1.0 / (1.0 + ratio)
        diag.update(lag=n, truncation="censored F_n/n replaced by (walk_steps - n)/n",
                    censored_fraction=float(np.mean(F < 0)))
    elif method == "direct":
        vals = _rng.map_ordered(lambda s: walk_span_measure(gen_srw(1, walk_steps, s), 1.0 / walk_steps),
                                seeds, threads)
    else:
        raise ValueError(f"unknown method {method!r}")
    return EstimateSummary.from_samples(vals, diag)


def estimate_r0(n_replicates: int, walk_steps: int, seed: int, threads: int = 1) -> EstimateSummary:
    """Mean of R0/N, the longest complete excursion from 0 rescaled by walk length."""
    seeds = _rng.replicate_seeds(seed, n_replicates)
    vals = _rng.map_ordered(lambda s: longest_excursions(gen_srw(1, walk_steps, s))[1] / walk_steps,
                            seeds, threads)
    return EstimateSummary.from_samples(vals, {"walk_steps": int(walk_steps), "reference": R0_REFERENCE,
                                               "note": "finite-N discretization bias not corrected"})


def capacity_estimate(K: IntervalSet, n_replicates: int, walk_steps: int, seed: int,
                      threads: int = 1) -> EstimateSummary:
    """Fraction of interpolated walks on [0, 1] whose span set meets K."""
    if K.is_empty:
        raise ValueError("K must be nonempty")
    if K.min() < 0 or K.max() > 1:
        raise ValueError("K must lie in [0, 1]")
    seeds = _rng.replicate_seeds(seed, n_replicates)

    def hit(s):
        w = gen_srw(1, walk_steps, s)
        return float(span_pl_1d(to_pl(w, 1.0 / walk_steps)).intersects(K))

    vals = _rng.map_ordered(hit, seeds, threads)
    return EstimateSummary.from_samples(vals, {"walk_steps": int(walk_steps), "K": K.to_json_obj()["intervals"]})
