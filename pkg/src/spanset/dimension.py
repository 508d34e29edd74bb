"""Box counting on span sets and the slope fit used as a dimension proxy.

Boxes are half-open [j*delta, (j+1)*delta) anchored at 0, so counts depend only
on the set and the grid. The window excludes 0, where spans accumulate.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats as _sstats

from . import rng as _rng
from .intervals import IntervalSet
from .paths import gen_srw
from .spans import SpanSet, span_lattice


@dataclass(frozen=True)
class BoxCountTable:
    scales: tuple
    counts: tuple
    window: tuple

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=float)
        c = np.asarray(self.counts)
        if s.shape != c.shape:
            raise ValueError("scales and counts differ in length")
        if np.any(np.diff(s) >= 0):
            raise ValueError("scales must be strictly decreasing")

    @property
    def rows(self) -> list[tuple[float, int]]:
        return list(zip(self.scales, self.counts))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scale", "count"])
        for s, c in self.rows:
            w.writerow([repr(float(s)), int(c)])
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {"window": list(self.window), "rows": [[float(s), int(c)] for s, c in self.rows]}


def dyadic_scales(k_min: int, k_max: int) -> list[float]:
    return [2.0 ** -k for k in range(k_min, k_max + 1)]


def _check_scales(scales) -> list[float]:
    out = []
    for s in scales:
        m, e = math.frexp(float(s))
        if not (s > 0 and m == 0.5):
            raise ValueError(f"scale {s!r} is not a power of two")
        out.append(float(s))
    return out


def _count_intervals(ivs: IntervalSet, delta: float) -> int:
    if ivs.is_empty:
        return 0
    j0 = np.floor(ivs.lo / delta).astype(np.int64)
    j1 = np.floor(ivs.hi / delta).astype(np.int64)
    # components are sorted, so only the previous component can share boxes
    prev = np.concatenate(([np.iinfo(np.int64).min], j1[:-1]))
    start = np.maximum(j0, prev + 1)
    return int(np.sum(np.maximum(j1 - start + 1, 0)))


def box_count(obj: Union[IntervalSet, SpanSet], window, scales: Sequence[float],
              factor: Optional[float] = None) -> BoxCountTable:
    """Boxes [j*delta, (j+1)*delta) meeting obj within the window, for each delta.

    A SpanSet is read as the points lag*factor; with factor None the factor is
    1/n_steps and box indices are computed in exact integer arithmetic.
    """
    l, u = float(window[0]), float(window[1])
    if not l > 0:
        raise ValueError("window must exclude 0 (l > 0)")
    if not u > l:
        raise ValueError("window must satisfy l < u")
    scales = sorted(_check_scales(scales), reverse=True)
    counts = []
    if isinstance(obj, SpanSet):
        k = obj.lags
        if factor is None:
            N = obj.n_steps
            k = k[(k >= l * N) & (k <= u * N)]
            for s in scales:
                m = -math.frexp(s)[1] + 1
                counts.append(int(np.unique((k << m) // N).size) if m >= 0 else int(np.unique(k // (N << -m)).size))
        else:
            x = k * float(factor)
            x = x[(x >= l) & (x <= u)]
            for s in scales:
                counts.append(int(np.unique(np.floor(x / s)).size))
    else:
        clipped = obj.clip(l, u)
        for s in scales:
            counts.append(_count_intervals(clipped, s))
    return BoxCountTable(tuple(scales), tuple(counts), (l, u))


def fit_dimension(table: BoxCountTable, scale_range=None) -> tuple[float, float]:
    """Least-squares slope of log2(count) on -log2(scale), and its r^2."""
    s = np.asarray(table.scales, dtype=float)
    c = np.asarray(table.counts, dtype=float)
    keep = np.ones(s.size, dtype=bool)
    if scale_range is not None:
        lo, hi = sorted(map(float, scale_range))
        keep = (s >= lo * (1 - 1e-12)) & (s <= hi * (1 + 1e-12))
    if keep.sum() < 3:
        raise ValueError("need at least 3 rows in the fitting range")
    if np.any(c[keep] <= 0):
        raise ValueError("zero counts cannot be fitted on a log scale")
    x = -np.log2(s[keep])
    y = np.log2(c[keep])
    if np.all(y == y[0]):
        return 0.0, 1.0
    res = _sstats.linregress(x, y)
    return float(res.slope), float(res.rvalue ** 2)


@dataclass
class DimensionConfig:
    dim: int
    n_steps: int = 10 ** 6
    n_seeds: int = 20
    window: tuple = (0.05, 1.0)
    scale_exponents: tuple = (4, 12)
    fit_exponents: tuple = (6, 10)


@dataclass
class DimensionResult:
    config: DimensionConfig
    slopes: list
    r_squared: list
    tables: list = field(repr=False, default_factory=list)
    n_empty: int = 0

    @property
    def mean_slope(self) -> float:
        return float(np.mean(self.slopes))

    @property
    def std_error(self) -> float:
        return float(np.std(self.slopes, ddof=1) / math.sqrt(len(self.slopes))) if len(self.slopes) > 1 else 0.0

    def to_json_obj(self) -> dict:
        return {
            "dim": self.config.dim,
            "n_steps": self.config.n_steps,
            "window": list(self.config.window),
            "mean_slope": self.mean_slope,
            "std_error": self.std_error,
            "slopes": list(self.slopes),
            "r_squared": list(self.r_squared),
            "n_seeds_without_spans": self.n_empty,
            "note": "box-count slope, a proxy for Hausdorff dimension",
        }


def dimension_pipeline(cfg: DimensionConfig, seed: int, threads: int = 1) -> DimensionResult:
    """Box-count slopes of (1/N)-rescaled lattice spans over independent walks."""
    scales = dyadic_scales(*cfg.scale_exponents)
    fit = (2.0 ** -cfg.fit_exponents[1], 2.0 ** -cfg.fit_exponents[0])

    def one(s):
        spans = span_lattice(gen_srw(cfg.dim, cfg.n_steps, s))
        table = box_count(spans, cfg.window, scales)
        try:
            return table, fit_dimension(table, fit)
        except ValueError:
            # transient walks (dim 3) may have no span inside the window at all
            return table, None

    out = _rng.map_ordered(one, _rng.replicate_seeds(seed, cfg.n_seeds), threads)
    fitted = [o for o in out if o[1] is not None]
    if not fitted:
        raise ValueError("no seed produced spans inside the window")
    return DimensionResult(cfg, [o[1][0] for o in fitted], [o[1][1] for o in fitted],
                           [o[0] for o in out], n_empty=len(out) - len(fitted))
