"""Hausdorff distance between compact subsets of the line, and span convergence runs."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as _rng
from .intervals import IntervalSet
from .paths import LatticePath, embed_coarse, knight_walk
from .spans import span_lattice, span_pl_1d
from .paths import to_pl


def directed_distance(A: IntervalSet, B: IntervalSet) -> float:
    """sup_{x in A} dist(x, B).

    dist(., B) is piecewise linear on A with maxima at A's endpoints or at the
    midpoints of B's gaps, so these finitely many candidates suffice.
    """
    cand = [A.lo, A.hi]
    if len(B) > 1:
        mids = 0.5 * (B.hi[:-1] + B.lo[1:])
        cand.append(mids[A.contains(mids)])
    x = np.concatenate(cand)
    return float(np.max(B.distance_to(x)))


def hausdorff_distance(A: IntervalSet, B: IntervalSet) -> float:
    if A.is_empty or B.is_empty:
        raise ValueError("Hausdorff distance needs nonempty sets")
    return max(directed_distance(A, B), directed_distance(B, A))


@dataclass
class ConvergenceRow:
    level: int
    n_steps: int
    median: float
    q25: float
    q75: float
    n_seeds: int
    distances: list = field(repr=False, default_factory=list)


@dataclass
class ConvergenceConfig:
    levels: tuple = (4, 5, 6, 7, 8)
    fine_level: int = 10
    horizon: float = 2.0
    n_seeds: int = 50
    coupling: str = "knight"


def _reference(fine: LatticePath, level: int) -> IntervalSet:
    """Span set on [0, 1] of the interpolated fine walk."""
    N = 4 ** level
    if fine.n_steps < N:
        raise ValueError("fine walk is shorter than Brownian time 1")
    return span_pl_1d(to_pl(fine.prefix(N), 1.0 / N))


def _coarse_points(fine: LatticePath, level: int) -> IntervalSet:
    N = 4 ** level
    coarse = embed_coarse(fine, level).coarse
    if coarse.n_steps < N:
        raise ValueError(f"fine walk too short to extract {N} steps at level {level}; raise the horizon")
    return span_lattice(coarse.prefix(N)).to_points(1.0 / N)


def convergence_experiment(cfg: ConvergenceConfig, seed: int, threads: int = 1) -> list[ConvergenceRow]:
    """d_H between (1/N)-rescaled lattice spans at each level and a fine reference span set.

    knight: the coarse walks are read off the fine walk that defines the
    reference. independent: each level compares a separately drawn fine walk's
    embedded walk against the reference of another fine walk.
    """
    if cfg.coupling not in ("knight", "independent"):
        raise ValueError(f"unknown coupling {cfg.coupling!r}")
    levels = [int(m) for m in cfg.levels]
    if any(m != int(m) or m < 0 for m in cfg.levels) or max(levels) >= cfg.fine_level:
        raise ValueError("levels must be integers below the fine level")

    def one(r):
        s = _rng.mix64(seed, r)
        fine = knight_walk(cfg.fine_level, cfg.horizon, s)
        ref = _reference(fine, cfg.fine_level)
        if cfg.coupling == "independent":
            fine = knight_walk(cfg.fine_level, cfg.horizon, _rng.mix64(s, 1))
        return [hausdorff_distance(_coarse_points(fine, m), ref) for m in levels]

    D = np.asarray(_rng.map_ordered(one, range(cfg.n_seeds), threads))
    rows = []
    for k, m in enumerate(levels):
        d = D[:, k]
        q25, med, q75 = np.quantile(d, [0.25, 0.5, 0.75])
        rows.append(ConvergenceRow(m, 4 ** m, float(med), float(q25), float(q75), cfg.n_seeds, d.tolist()))
    return rows


def rows_to_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["parameter", "median", "q25", "q75", "n_seeds"])
    for r in rows:
        w.writerow([r.level, repr(r.median), repr(r.q25), repr(r.q75), r.n_seeds])
    return buf.getvalue()
