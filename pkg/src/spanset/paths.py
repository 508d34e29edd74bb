"""Random walks, sampled Gaussian paths and their piecewise-linear versions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

import numpy as np

from . import rng as _rng


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticePath:
    """Nearest-neighbour walk on Z^dim, positions indexed 0..N.

    `level` is the dyadic refinement level n of a Knight-type walk (space
    unit 2^-n, time unit 2^-2n); ``None`` for a plain walk.
    """

    positions: np.ndarray
    level: Optional[int] = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[1] not in (1, 2, 3):
            raise ValueError("positions must have shape (N+1, dim) with dim in {1,2,3}")
        if pos.shape[0] < 1:
            raise ValueError("a walk needs at least one position")
        if np.any(pos[0] != 0):
            raise ValueError("walk must start at the origin")
        if pos.shape[0] > 1:
            step = np.abs(np.diff(pos, axis=0)).sum(axis=1)
            if np.any(step != 1):
                raise ValueError("consecutive positions must differ by one unit in one coordinate")
        if self.level is not None and self.level < 0:
            raise ValueError("level must be nonnegative")
        object.__setattr__(self, "positions", _frozen(pos))

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def n_steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def values(self) -> np.ndarray:
        """1-D view of the positions (dim 1 only)."""
        if self.dim != 1:
            raise ValueError("values is only defined for one-dimensional walks")
        return self.positions[:, 0]

    def prefix(self, n_steps: int) -> "LatticePath":
        return LatticePath(self.positions[: n_steps + 1], self.level)

    def __len__(self):
        return self.positions.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LatticePath):
            return NotImplemented
        return self.level == other.level and np.array_equal(self.positions, other.positions)


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Grid samples of a path in R^dim at times 0, dt, ..., T."""

    values: np.ndarray
    horizon: float
    grid_step: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        n = _grid_count(self.horizon, self.grid_step)
        if v.shape[0] != n + 1:
            raise ValueError(f"expected {n + 1} samples, got {v.shape[0]}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.shape[0]) * self.grid_step


@dataclass(frozen=True, eq=False)
class PiecewiseLinearPath:
    """Continuous 1-D path given by breakpoints (times[k], values[k]).

    `lattice` optionally records the walk and scales the path was
    interpolated from; span computations use it for an exact integer route.
    """

    times: np.ndarray
    values: np.ndarray
    lattice: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size < 2:
            raise ValueError("need at least two breakpoints")
        if t[0] != 0.0:
            raise ValueError("first breakpoint time must be 0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoint times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ValueError("breakpoints must be finite")
        object.__setattr__(self, "times", _frozen(t))
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_breakpoints(cls, pairs) -> "PiecewiseLinearPath":
        arr = np.asarray(pairs, dtype=np.float64)
        return cls(arr[:, 0], arr[:, 1])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_pieces(self) -> int:
        return self.times.size - 1

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def time_scaled(self, c: float) -> "PiecewiseLinearPath":
        return PiecewiseLinearPath(self.times * c, self.values)

    def negated(self) -> "PiecewiseLinearPath":
        return PiecewiseLinearPath(self.times, -self.values)

    def reversed(self) -> "PiecewiseLinearPath":
        T = self.times[-1]
        return PiecewiseLinearPath(T - self.times[::-1], self.values[::-1])

    def prefix_until(self, k: int) -> "PiecewiseLinearPath":
        """Path restricted to its first `k` pieces."""
        return PiecewiseLinearPath(self.times[: k + 1], self.values[: k + 1])


def _grid_count(T: float, dt: float) -> int:
    if not (T > 0 and dt > 0):
        raise ValueError("horizon and grid step must be positive")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ValueError(f"T/grid_step = {T / dt!r} is not a positive integer")
    return int(n)


def _check_dim(dim: int) -> None:
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim!r}")


# ---------------------------------------------------------------- walk steps
# Steps are read from raw 64-bit Philox output so that a longer walk with the
# same seed extends a shorter one: dim 1 uses one bit per step, dim 2 two bits,
# dim 3 one 32-bit half-word per step (mapped to 0..5 by multiply-shift).

_STEPS_PER_WORD = {1: 64, 2: 32, 3: 2}
_UNIT = {
    2: np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=np.int8),
    3: np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.int8),
}


def _steps_from_words(words: np.ndarray, dim: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    if dim == 1:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return (2 * bits.astype(np.int8) - 1)[:, None]
    if dim == 2:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little").reshape(-1, 2)
        # bit 0 picks the axis, bit 1 the sign
        idx = bits[:, 0] + 2 * bits[:, 1]
        return _UNIT[2][idx]
    halves = np.empty(2 * words.size, dtype=np.uint64)
    halves[0::2] = words & np.uint64(0xFFFFFFFF)
    halves[1::2] = words >> np.uint64(32)
    idx = (halves * np.uint64(6)) >> np.uint64(32)
    return _UNIT[3][idx.astype(np.intp)]


def iter_steps(dim: int, seed: int, chunk_steps: int = 1 << 16) -> Iterator[np.ndarray]:
    """Endless stream of walk steps in chunks; concatenation equals gen_srw's steps."""
    _check_dim(dim)
    per = _STEPS_PER_WORD[dim]
    words = max(1, -(-chunk_steps // per))
    bg = _rng.bit_generator(seed)
    while True:
        yield _steps_from_words(bg.random_raw(words), dim)


def gen_srw(dim: int, n_steps: int, seed: int, level: Optional[int] = None) -> LatticePath:
    """Simple symmetric nearest-neighbour walk of `n_steps` steps."""
    _check_dim(dim)
    if int(n_steps) != n_steps or n_steps < 1:
        raise ValueError("n_steps must be a positive integer")
    n_steps = int(n_steps)
    per = _STEPS_PER_WORD[dim]
    words = _rng.bit_generator(seed).random_raw(-(-n_steps // per))
    steps = _steps_from_words(np.atleast_1d(words), dim)[:n_steps]
    pos = np.zeros((n_steps + 1, dim), dtype=np.int64)
    np.cumsum(steps, axis=0, out=pos[1:])
    return LatticePath(pos, level)


def gen_gaussian_path(dim: int, T: float, grid_step: float, seed: int) -> SampledPath:
    """Brownian motion in R^dim sampled on the grid 0, dt, ..., T."""
    _check_dim(dim)
    n = _grid_count(T, grid_step)
    g = _rng.generator(seed)
    inc = g.standard_normal((n, dim)) * math.sqrt(grid_step)
    vals = np.zeros((n + 1, dim))
    np.cumsum(inc, axis=0, out=vals[1:])
    return SampledPath(vals, T, grid_step)


class CoarseEmbedding(NamedTuple):
    coarse: LatticePath
    hit_indices: np.ndarray
    # fine steps after the last hit; nonzero means the next coarse step was cut off
    pending_steps: int


def embed_coarse(fine: LatticePath, target_level: int) -> CoarseEmbedding:
    """Extract the coarser walk read off `fine` at hitting times of a 2^(n-m) grid.

    Hit k+1 is the first fine index after hit k whose position differs from the
    position at hit k by exactly 2^(n-m). The coarse walk is the maximal
    prefix the finite fine walk determines.
    """
    if fine.dim != 1:
        raise ValueError("coarse embedding is defined for one-dimensional walks")
    if fine.level is None:
        raise ValueError("fine walk has no level")
    if not 0 <= target_level < fine.level:
        raise ValueError("target level must satisfy 0 <= m < n")
    f = 1 << (fine.level - target_level)
    x = fine.values
    # Between consecutive visits to multiples of f the walk stays strictly
    # inside one cell, so hits are the visits whose level changed.
    visits = np.flatnonzero(x % f == 0)
    lv = x[visits]
    hits = np.concatenate(([0], visits[1:][lv[1:] != lv[:-1]]))
    coarse = LatticePath(x[hits] // f, target_level)
    return CoarseEmbedding(coarse, hits, int(fine.n_steps - hits[-1]))


def to_pl(walk: LatticePath, time_scale: float = 1.0, space_scale: float = 1.0) -> PiecewiseLinearPath:
    """Linear interpolation of a 1-D walk: breakpoints (k*time_scale, x_k*space_scale)."""
    if walk.dim != 1:
        raise ValueError("only one-dimensional walks interpolate to a real path")
    if not (time_scale > 0 and space_scale > 0):
        raise ValueError("scales must be positive")
    k = np.arange(walk.n_steps + 1, dtype=np.float64)
    return PiecewiseLinearPath(
        k * time_scale,
        walk.values * float(space_scale),
        lattice=(walk, float(time_scale), float(space_scale)),
    )


def knight_walk(level: int, horizon: float, seed: int) -> LatticePath:
    """Walk at refinement `level` long enough to cover Brownian time `horizon`."""
    return gen_srw(1, int(math.ceil(horizon * 4**level)), seed, level=level)
