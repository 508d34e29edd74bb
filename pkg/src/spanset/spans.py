"""Span sets {t - s : w_t = w_s, s <= t}.

The span set of a path is the image of its level set {(s, t) : w_s = w_t}
under (s, t) -> t - s. For a piecewise-linear path that level set is a union
of segments, one per pair of linear pieces with overlapping value ranges, so
it can be computed exactly.

Performance notes: the generic sweep sorts pieces by their lowest value and
visits only pairs whose value ranges overlap. Paths interpolated from a simple
walk take an integer route instead: there every piece crosses exactly one unit
band, and a pair of pieces crossing the same band in opposite directions at
steps u < d contributes the interval [d-u-1, d-u+1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .intervals import IntervalSet, _merge_sorted
from .paths import LatticePath, PiecewiseLinearPath, SampledPath

MERGE_RTOL = 1e-12
ORACLE_CAP = 5000


@dataclass(frozen=True, eq=False)
class SpanSet:
    """Exact integer spans {k - l >= 0 : x_k = x_l} of an N-step walk."""

    lags: np.ndarray
    n_steps: int

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=np.int64)
        if lags.size == 0 or lags[0] != 0:
            raise ValueError("a span set always contains 0")
        if np.any(np.diff(lags) <= 0) or lags[-1] > self.n_steps:
            raise ValueError("lags must be strictly increasing and at most n_steps")
        lags.setflags(write=False)
        object.__setattr__(self, "lags", lags)

    def __eq__(self, other):
        if not isinstance(other, SpanSet):
            return NotImplemented
        return self.n_steps == other.n_steps and np.array_equal(self.lags, other.lags)

    def __len__(self):
        return self.lags.size

    def __contains__(self, k):
        i = np.searchsorted(self.lags, k)
        return bool(i < self.lags.size and self.lags[i] == k)

    def rescaled(self, factor: float) -> np.ndarray:
        return self.lags * float(factor)

    def to_points(self, factor: float = 1.0) -> IntervalSet:
        return IntervalSet.from_points(self.rescaled(factor))

    def to_json_obj(self) -> dict:
        return {"lags": self.lags.tolist()}


# ------------------------------------------------------------------ PL spans
@njit(cache=True)
def _time_at(t0, t1, y0, y1, v):
    if v == y0:
        return t0
    if v == y1:
        return t1
    return t0 + (v - y0) * (t1 - t0) / (y1 - y0)


@njit(cache=True)
def _compact(blo, bhi, k, tol):
    order = np.argsort(blo[:k], kind="mergesort")
    a, b = _merge_sorted(blo[:k][order], bhi[:k][order], tol)
    m = a.shape[0]
    blo[:m] = a
    bhi[:m] = b
    return m


@njit(cache=True)
def _pl_span_intervals(t, y, tol):
    n = t.shape[0] - 1
    lo = np.minimum(y[:-1], y[1:])
    hi = np.maximum(y[:-1], y[1:])
    order = np.argsort(lo, kind="mergesort")
    cap = 1024 + 4 * n
    blo = np.empty(cap)
    bhi = np.empty(cap)
    blo[0] = 0.0
    bhi[0] = 0.0
    k = 1
    for i in range(n):
        if y[i] == y[i + 1]:
            blo[k] = 0.0
            bhi[k] = t[i + 1] - t[i]
            k += 1
            if k == cap:
                k = _compact(blo, bhi, k, tol)
    for pi in range(n):
        p = order[pi]
        for qi in range(pi + 1, n):
            q = order[qi]
            if lo[q] > hi[p]:
                break
            i = min(p, q)
            j = max(p, q)
            ti0 = t[i]
            ti1 = t[i + 1]
            yi0 = y[i]
            yi1 = y[i + 1]
            tj0 = t[j]
            tj1 = t[j + 1]
            yj0 = y[j]
            yj1 = y[j + 1]
            flat_i = yi0 == yi1
            flat_j = yj0 == yj1
            if flat_i and flat_j:
                a = tj0 - ti1
                b = tj1 - ti0
            elif flat_i:
                tt = _time_at(tj0, tj1, yj0, yj1, yi0)
                a = tt - ti1
                b = tt - ti0
            elif flat_j:
                ss = _time_at(ti0, ti1, yi0, yi1, yj0)
                a = tj0 - ss
                b = tj1 - ss
            else:
                vlo = max(lo[i], lo[j])
                vhi = min(hi[i], hi[j])
                h1 = _time_at(tj0, tj1, yj0, yj1, vlo) - _time_at(ti0, ti1, yi0, yi1, vlo)
                mi = (yi1 - yi0) / (ti1 - ti0)
                mj = (yj1 - yj0) / (tj1 - tj0)
                if mi == mj:
                    # parallel pieces: the level set is a diagonal segment, one lag
                    a = h1
                    b = h1
                else:
                    h2 = _time_at(tj0, tj1, yj0, yj1, vhi) - _time_at(ti0, ti1, yi0, yi1, vhi)
                    a = min(h1, h2)
                    b = max(h1, h2)
            if a < 0.0:
                a = 0.0
            if b < a:
                b = a
            blo[k] = a
            bhi[k] = b
            k += 1
            if k == cap:
                k = _compact(blo, bhi, k, tol)
                if k > cap // 2:
                    nlo = np.empty(2 * cap)
                    nhi = np.empty(2 * cap)
                    nlo[:k] = blo[:k]
                    nhi[:k] = bhi[:k]
                    blo = nlo
                    bhi = nhi
                    cap *= 2
    k = _compact(blo, bhi, k, tol)
    return blo[:k].copy(), bhi[:k].copy()


@njit(cache=True, nogil=True)
def _crossing_lags(x):
    """hit[L] is True when some unit band is crossed upward and downward L steps apart."""
    N = x.shape[0] - 1
    band = np.minimum(x[:-1], x[1:])
    order = np.argsort(band, kind="mergesort")
    hit = np.zeros(N + 1, dtype=np.bool_)
    ups = np.empty(N, dtype=np.int64)
    downs = np.empty(N, dtype=np.int64)
    g = 0
    while g < N:
        b = band[order[g]]
        nu = 0
        nd = 0
        h = g
        while h < N and band[order[h]] == b:
            s = order[h]
            if x[s + 1] > x[s]:
                ups[nu] = s
                nu += 1
            else:
                downs[nd] = s
                nd += 1
            h += 1
        for a in range(nu):
            u = ups[a]
            for c in range(nd):
                dd = downs[c] - u
                if dd < 0:
                    dd = -dd
                hit[dd] = True
        g = h
    return hit


def covered_cells(walk: LatticePath) -> np.ndarray:
    """cells[c] is True when [c, c+1] lies in the span set of the interpolated walk."""
    if walk.dim != 1:
        raise ValueError("covered cells are defined for one-dimensional walks")
    cross = _crossing_lags(np.ascontiguousarray(walk.values))
    # [L-1, L+1] covers unit cells L-1 and L
    return cross[:-1] | cross[1:]


def walk_span_measure(walk: LatticePath, time_scale: float = 1.0) -> float:
    """Lebesgue measure of span_pl_1d(to_pl(walk, time_scale))."""
    return int(np.count_nonzero(covered_cells(walk))) * float(time_scale)


def _walk_span_intervals(walk: LatticePath) -> np.ndarray:
    """Span set of the unit-scale interpolation of a 1-D walk, as (k, 2) integers."""
    N = walk.n_steps
    cells = covered_cells(walk)
    lag_pts = span_lattice(walk).lags
    edges = np.diff(np.concatenate(([0], cells.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    ivs = [np.column_stack((starts, ends)).astype(np.float64)]
    # lattice lags not inside a covered cell stay as isolated points
    covered = np.zeros(N + 1, dtype=bool)
    covered[:N] |= cells
    covered[1:] |= cells
    iso = lag_pts[~covered[lag_pts]].astype(np.float64)
    ivs.append(np.column_stack((iso, iso)))
    arr = np.vstack(ivs)
    return arr[np.argsort(arr[:, 0], kind="mergesort")]


def span_pl_1d(path: PiecewiseLinearPath, method: str = "auto") -> IntervalSet:
    """Exact span set {t - s : w_t = w_s, 0 <= s <= t <= T} of a 1-D PL path.

    method: "auto" uses the integer route for walk-interpolated paths and the
    generic cell sweep otherwise; "generic" and "lattice" force a route.
    """
    if method not in ("auto", "generic", "lattice"):
        raise ValueError(f"unknown method {method!r}")
    if method == "lattice" and path.lattice is None:
        raise ValueError("path carries no lattice walk")
    if path.lattice is not None and method != "generic":
        walk, a, _ = path.lattice
        return IntervalSet(_walk_span_intervals(walk) * a)
    tol = MERGE_RTOL * path.horizon
    lo, hi = _pl_span_intervals(path.times, path.values, tol)
    return IntervalSet(np.column_stack((lo, hi)))


# ------------------------------------------------------------- lattice spans
@njit(cache=True, nogil=True)
def _group_lags(order, keys, N):
    hit = np.zeros(N + 1, dtype=np.bool_)
    hit[0] = True
    n = order.shape[0]
    g = 0
    while g < n:
        key = keys[order[g]]
        h = g + 1
        while h < n and keys[order[h]] == key:
            h += 1
        for a in range(g, h):
            oa = order[a]
            for b in range(a + 1, h):
                hit[order[b] - oa] = True
        g = h
    return hit


def _position_keys(walk: LatticePath) -> np.ndarray:
    pos = walk.positions
    if walk.dim == 1:
        return np.ascontiguousarray(pos[:, 0])
    N = walk.n_steps
    base = 2 * N + 1
    key = np.zeros(pos.shape[0], dtype=np.int64)
    for c in range(walk.dim - 1, -1, -1):
        key = key * base + (pos[:, c] + N)
    return key


def span_lattice(walk: LatticePath) -> SpanSet:
    """Exact spans of a walk in any dimension, grouping times by position."""
    keys = _position_keys(walk)
    order = np.argsort(keys, kind="stable")
    hit = _group_lags(order, keys, walk.n_steps)
    return SpanSet(np.flatnonzero(hit), walk.n_steps)


@njit(cache=True)
def _oracle_lags(pos):
    n = pos.shape[0]
    d = pos.shape[1]
    hit = np.zeros(n, dtype=np.bool_)
    for l in range(n):
        for k in range(l, n):
            same = True
            for c in range(d):
                if pos[k, c] != pos[l, c]:
                    same = False
                    break
            if same:
                hit[k - l] = True
    return hit


def span_lattice_oracle(walk: LatticePath, cap: int = ORACLE_CAP) -> SpanSet:
    """Brute-force double loop over all index pairs; for cross-checking."""
    if walk.n_steps > cap:
        raise ValueError(f"walk has {walk.n_steps} steps, oracle cap is {cap}")
    hit = _oracle_lags(np.ascontiguousarray(walk.positions))
    return SpanSet(np.flatnonzero(hit), walk.n_steps)


# ------------------------------------------------------------------ eps-spans
@njit(cache=True)
def _min_lag_distance(v, k_lo, k_hi):
    n = v.shape[0]
    d = v.shape[1]
    out = np.empty(k_hi - k_lo + 1)
    for k in range(k_lo, k_hi + 1):
        best = np.inf
        for s in range(n - k):
            acc = 0.0
            for c in range(d):
                z = v[s + k, c] - v[s, c]
                acc += z * z
            if acc < best:
                best = acc
        out[k - k_lo] = math.sqrt(best)
    return out


def _window_lags(path: SampledPath, window) -> tuple[int, int]:
    l, u = float(window[0]), float(window[1])
    if not 0 < l < u:
        raise ValueError("window must satisfy 0 < l < u")
    dt = path.grid_step
    if l < dt * (1 - 1e-9) or u > path.horizon * (1 + 1e-9):
        raise ValueError("window must lie within [grid_step, horizon]")
    k_lo = int(math.ceil(l / dt - 1e-9))
    k_hi = int(math.floor(u / dt + 1e-9))
    return k_lo, k_hi


def min_lag_distances(path: SampledPath, window) -> tuple[np.ndarray, np.ndarray]:
    """(lags, min_s |path(s+h) - path(s)|) over grid lags h in the window."""
    k_lo, k_hi = _window_lags(path, window)
    d = _min_lag_distance(np.ascontiguousarray(path.values), k_lo, k_hi)
    return np.arange(k_lo, k_hi + 1) * path.grid_step, d


def eps_cover(lags: np.ndarray, dist: np.ndarray, eps: float, dt: float, window) -> IntervalSet:
    keep = lags[dist <= eps]
    half = dt / 2
    ivs = IntervalSet.from_intervals(np.column_stack((keep - half, keep + half)).clip(min=0.0), tol=1e-12 * dt)
    return ivs.clip(float(window[0]), float(window[1]))


def eps_span_grid(path: SampledPath, eps: float, window) -> IntervalSet:
    """Outer approximation of the eps-span set of a sampled path inside `window`.

    Each grid lag h with some grid pair (s, s+h) at distance <= eps contributes
    [h - dt/2, h + dt/2]; the union is clipped to the window.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    lags, dist = min_lag_distances(path, window)
    return eps_cover(lags, dist, eps, path.grid_step, window)


# ------------------------------------------------------- excursion refinement
def spans_from_excursions(*excursions) -> IntervalSet:
    """Spans guaranteed by excursions of a path above one common level.

    One excursion (u, u+T) gives [0, T]. Two excursions (p, q), (r, s) with
    p < q < r < s give [max(r-p, s-q), s-p] and [r-q, min(r-p, s-q)].
    """
    if len(excursions) == 1:
        u, v = excursions[0]
        if not u < v:
            raise ValueError("excursion must have positive length")
        return IntervalSet.from_intervals([(0.0, v - u)])
    if len(excursions) != 2:
        raise ValueError("expected one or two excursions")
    (p, q), (r, s) = excursions
    if not p < q < r < s:
        raise ValueError("excursion endpoints must satisfy p < q < r < s")
    return IntervalSet.from_intervals(
        [(max(r - p, s - q), s - p), (r - q, min(r - p, s - q))]
    )
