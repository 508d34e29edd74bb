"""Finite unions of closed intervals on the half-line."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numba import njit


@njit(cache=True)
def _merge_sorted(lo, hi, tol):
    n = lo.shape[0]
    out_lo = np.empty(n)
    out_hi = np.empty(n)
    if n == 0:
        return out_lo, out_hi
    k = 0
    a = lo[0]
    b = hi[0]
    for i in range(1, n):
        if lo[i] <= b + tol:
            if hi[i] > b:
                b = hi[i]
        else:
            out_lo[k] = a
            out_hi[k] = b
            k += 1
            a = lo[i]
            b = hi[i]
    out_lo[k] = a
    out_hi[k] = b
    return out_lo[: k + 1], out_hi[: k + 1]


def merge_intervals(lo: np.ndarray, hi: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Canonical union of [lo_i, hi_i] as a (k, 2) array.

    Intervals whose gap is at most `tol` are joined.
    """
    lo = np.asarray(lo, dtype=np.float64).ravel()
    hi = np.asarray(hi, dtype=np.float64).ravel()
    if lo.shape != hi.shape:
        raise ValueError("lo and hi must have the same length")
    if np.any(hi < lo):
        raise ValueError("interval with hi < lo")
    order = np.lexsort((hi, lo))
    a, b = _merge_sorted(lo[order], hi[order], float(tol))
    return np.column_stack((a, b))


def _fmt(x: float) -> str:
    return np.format_float_positional(float(x), trim="-")


@dataclass(frozen=True, eq=False)
class IntervalSet:
    """Sorted, disjoint closed intervals [a_i, b_i] with b_i < a_(i+1).

    Degenerate intervals (a_i == b_i) are isolated points. Build instances with
    `from_intervals` (merges) unless the array is already canonical.
    """

    intervals: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        if arr.size:
            if np.any(arr[:, 1] < arr[:, 0]):
                raise ValueError("interval with b < a")
            if np.any(arr[1:, 0] <= arr[:-1, 1]):
                raise ValueError("intervals must be sorted and strictly separated")
            if arr[0, 0] < 0:
                raise ValueError("endpoints must be nonnegative")
            if not np.all(np.isfinite(arr)):
                raise ValueError("endpoints must be finite")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "intervals", arr)

    @classmethod
    def from_intervals(cls, items: Iterable, tol: float = 0.0) -> "IntervalSet":
        arr = np.asarray(list(items) if not isinstance(items, np.ndarray) else items, dtype=np.float64)
        if arr.size == 0:
            return cls(np.empty((0, 2)))
        arr = arr.reshape(-1, 2)
        return cls(merge_intervals(arr[:, 0], arr[:, 1], tol))

    @classmethod
    def from_points(cls, points, tol: float = 0.0) -> "IntervalSet":
        p = np.asarray(points, dtype=np.float64).ravel()
        return cls(merge_intervals(p, p, tol))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(np.empty((0, 2)))

    # -------------------------------------------------------------- queries
    @property
    def lo(self) -> np.ndarray:
        return self.intervals[:, 0]

    @property
    def hi(self) -> np.ndarray:
        return self.intervals[:, 1]

    def __len__(self) -> int:
        return self.intervals.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.intervals.shape[0] == 0

    def measure(self) -> float:
        return float(np.sum(self.hi - self.lo))

    @property
    def n_components(self) -> int:
        return len(self)

    def points(self) -> np.ndarray:
        """Isolated points (degenerate components)."""
        m = self.lo == self.hi
        return self.lo[m]

    def min(self) -> float:
        return float(self.intervals[0, 0])

    def max(self) -> float:
        return float(self.intervals[-1, 1])

    def distance_to(self, x) -> np.ndarray:
        """dist(x, self) for an array of reals."""
        if self.is_empty:
            raise ValueError("distance to an empty set")
        x = np.asarray(x, dtype=np.float64)
        # k = index of the last component whose left end is <= x
        k = np.searchsorted(self.lo, x, side="right") - 1
        kl = np.clip(k, 0, len(self) - 1)
        kr = np.clip(k + 1, 0, len(self) - 1)
        d_left = np.where(k >= 0, np.maximum(x - self.hi[kl], 0.0), np.inf)
        d_right = np.where(k + 1 < len(self), self.lo[kr] - x, np.inf)
        return np.minimum(d_left, np.maximum(d_right, 0.0))

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        return self.distance_to(x) <= tol

    def intersects(self, other: "IntervalSet") -> bool:
        if self.is_empty or other.is_empty:
            return False
        # two closed unions meet iff some pair of components overlaps
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            if A[i, 1] < B[j, 0]:
                i += 1
            elif B[j, 1] < A[i, 0]:
                j += 1
            else:
                return True
        return False

    def component_containing(self, x: float):
        k = int(np.searchsorted(self.lo, x, side="right")) - 1
        if k >= 0 and self.hi[k] >= x:
            return tuple(self.intervals[k])
        return None

    # ---------------------------------------------------------- transforms
    def union(self, other: "IntervalSet", tol: float = 0.0) -> "IntervalSet":
        return IntervalSet.from_intervals(np.vstack((self.intervals, other.intervals)), tol)

    def scaled(self, c: float) -> "IntervalSet":
        if c <= 0:
            raise ValueError("scale must be positive")
        return IntervalSet(self.intervals * c)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        a = np.maximum(self.lo, lo)
        b = np.minimum(self.hi, hi)
        keep = a <= b
        return IntervalSet.from_intervals(np.column_stack((a[keep], b[keep])))

    def merged(self, tol: float) -> "IntervalSet":
        return IntervalSet.from_intervals(self.intervals, tol)

    # ------------------------------------------------------- comparisons/io
    def __eq__(self, other):
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self.intervals, other.intervals)

    def allclose(self, other: "IntervalSet", atol: float) -> bool:
        return self.intervals.shape == other.intervals.shape and np.allclose(
            self.intervals, other.intervals, rtol=0.0, atol=atol
        )

    def __str__(self) -> str:
        if self.is_empty:
            return "∅"
        parts = []
        for a, b in self.intervals:
            parts.append("{%s}" % _fmt(a) if a == b else "[%s,%s]" % (_fmt(a), _fmt(b)))
        return " ∪ ".join(parts)

    def __repr__(self) -> str:
        return f"IntervalSet({self})"

    def to_json_obj(self) -> dict:
        return {"intervals": [[float(a), float(b)] for a, b in self.intervals]}

    def to_json(self) -> str:
        body = ", ".join("[%s, %s]" % (format(a, ".17g"), format(b, ".17g")) for a, b in self.intervals)
        return '{"intervals": [%s]}' % body

    @classmethod
    def from_json(cls, text) -> "IntervalSet":
        obj = json.loads(text) if isinstance(text, str) else text
        return cls(np.asarray(obj["intervals"], dtype=np.float64).reshape(-1, 2))
