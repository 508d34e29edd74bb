"""Moments of the approximate span measure and the energy integrals behind them.

M_{d,eps}(A) = iint_{0 <= s <= t <= xi} 1(t - s in A, |B_t - B_s| <= eps) ds dt,
with xi ~ Exp(1) independent of the d-dimensional Brownian motion B. Its first
moment on [a, inf) is int_a^inf e^-t P(|B_t| <= eps) dt and behaves like
eps^d c_d int_a^inf e^-t t^(-d/2) dt, where c_d = 1/(2^(d/2) Gamma(d/2 + 1)).

Second moments
--------------
For a pair (s, t) with t - s >= a and a pair (u, v) with v - u >= b, the limit
of E[eps^-d M([a,inf)) delta^-d M([b,inf))] splits over the relative order of
the four times. With b <= a, all six orders occur:

* disjoint (two orders): 2 I_a I_b, with I_x = int_x^inf e^-t t^(-d/2) dt;
* (u, v) nested in (s, t): int_{p>=a} e^-p log(p/b) dp for d = 2, and
  (2/sqrt b) int_{p>=a} e^-p p^-1 sqrt(p - b) dp for d = 3;
* (s, t) nested in (u, v): Gamma(2 - d/2) I_a;
* overlapping (two orders): twice the integral of
  G(p, q) = e^-(p+q) int_0^(p^q) e^r (pq - r^2)^(-d/2) dr over {p >= a, q >= b}.

All of it carries the factor c_d^2 (1/4 for d = 2, 2/(9 pi) for d = 3).
`m2_limit(form="literal")` instead returns the bracket as it is usually written,
which replaces the last two items by the integral of G over
{p >= a, q >= b} u {p >= b, q >= a}, drops the second nesting and uses
e^-p/p in the disjoint term for d = 3 as well. Direct simulation
(`mc_span_measure(..., mode="product")`) agrees with the default form.

Quadrature
----------
scipy.integrate.quad (QUADPACK) is the adaptive engine. Semi-infinite
integrals with an e^-t weight use t = a - log u, so int_a^inf e^-t g(t) dt =
e^-a int_0^1 g(a - log u) du. For the overlap term, write p = m,
q = m + s^2 and r = m - x^2 on the half p <= q; then

    int_0^m e^r (mq - r^2)^(-d/2) dr
        = e^m [A(m, s) + int_0^sqrt(m) 2x expm1(-x^2) / (m s^2 + x^2 (2m - x^2))^(d/2) dx],

where A is the closed form of int_0^m (mq - r^2)^(-d/2) dr. The remainder is
bounded, and 2s A is at worst logarithmic at s = 0, so no diagonal strip has
to be cut out. The two outer ranges are truncated at m = lo + 40 and
s = s0 + 8; the dropped mass is below e^-40 and e^-64 times the integrand's
bound, and is reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import cfunc, njit, types
from scipy import LowLevelCallable, integrate

from . import rng as _rng
from .special import exp1
from .stats import EstimateSummary

M_TAIL = 40.0
S_TAIL = 8.0


class NonConvergenceError(RuntimeError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200
    singularity_substitutions: bool = True

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")

    def halved(self) -> "QuadratureConfig":
        return QuadratureConfig(self.rel_tol / 2, self.abs_tol / 2, self.max_subdivisions,
                                self.singularity_substitutions)

    def tighter(self, factor: float) -> "QuadratureConfig":
        return QuadratureConfig(self.rel_tol * factor, self.abs_tol * factor,
                                self.max_subdivisions, self.singularity_substitutions)


@dataclass
class MomentResult:
    value: float
    est_error: float
    pieces: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {"value": self.value, "est_error": self.est_error, "pieces": dict(self.pieces),
                "diagnostics": dict(self.diagnostics)}


def _quad(f, lo, hi, cfg: QuadratureConfig, what: str, args=(), points=None, **weight) -> tuple[float, float]:
    out = integrate.quad(f, lo, hi, args=args, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                         limit=cfg.max_subdivisions, points=points, full_output=1, **weight)
    val, err = out[0], out[1]
    if len(out) >= 4:
        # QUADPACK appends a warning message only when ier > 0
        raise NonConvergenceError(f"{what}: {out[3]}")
    if not math.isfinite(val):
        raise NonConvergenceError(f"{what}: non-finite value")
    return val, err


def _exp_tail(g: Callable[[float], float], a: float, cfg: QuadratureConfig, what: str) -> tuple[float, float]:
    """int_a^inf e^-t g(t) dt via t = a - log u."""
    ea = math.exp(-a)

    def h(u):
        return g(a - math.log(u)) if u > 0 else 0.0

    val, err = _quad(h, 0.0, 1.0, cfg, what)
    return ea * val, ea * err


def c_d(d: int) -> float:
    _check_d(d)
    return 1.0 / (2.0 ** (d / 2) * math.gamma(d / 2 + 1))


def _check_d(d: int) -> None:
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")


# ---------------------------------------------------------------- first moment
def tail_power(d: int, a: float, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """I_a = int_a^inf e^-t t^(-d/2) dt."""
    if not a > 0:
        raise ValueError("the integral diverges at a = 0")
    return _exp_tail(lambda t: t ** (-d / 2), a, cfg, f"I_{a}")


def m1_asymptotic(d: int, a: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """lim eps^-d E M_{d,eps}([a, inf)); diverges as a -> 0."""
    _check_d(d)
    if not a > 0:
        raise ValueError("a must be positive; the limit is infinite at a = 0")
    return c_d(d) * tail_power(d, a, cfg)[0]


def _ball_prob_3(x: float) -> float:
    """P(|Z| <= x) for a standard Gaussian vector Z in R^3."""
    if x < 0.5:
        # series avoids the cancellation in erf - x e^(-x^2/2)
        total, term, k = 0.0, 1.0, 0
        while True:
            inc = term / (2 * k + 3)
            total += inc
            if abs(inc) < 1e-18 * total:
                break
            k += 1
            term *= -x * x / (2 * k)
        return math.sqrt(2 / math.pi) * x ** 3 * total
    return math.erf(x / math.sqrt(2)) - math.sqrt(2 / math.pi) * x * math.exp(-x * x / 2)


def ball_prob(d: int, eps: float, t: float) -> float:
    """P(|B_t| <= eps) for d-dimensional Brownian motion."""
    if d == 2:
        return -math.expm1(-eps * eps / (2 * t))
    return _ball_prob_3(eps / math.sqrt(t))


def m1_exact(d: int, a: float, eps: float, cfg: QuadratureConfig = QuadratureConfig()) -> MomentResult:
    """E M_{d,eps}([a, inf)) = int_a^inf e^-t P(|B_t| <= eps) dt (not rescaled)."""
    _check_d(d)
    if not (a > 0 and eps > 0):
        raise ValueError("a and eps must be positive")
    val, err = _exp_tail(lambda t: ball_prob(d, eps, t), a, cfg, "m1_exact")
    return MomentResult(val, err, {}, {"scaled": val / eps ** d, "substitution": "t = a - log u"})


# --------------------------------------------------------------- second moment
@cfunc(types.float64(types.intc, types.CPointer(types.float64)), cache=True)
def _overlap_remainder(n, xx):
    x = xx[0]
    m = xx[1]
    ms2 = xx[2]
    d = xx[3]
    den = ms2 + x * x * (2.0 * m - x * x)
    if den <= 0.0:
        return 0.0
    return 2.0 * x * math.expm1(-x * x) / den ** (0.5 * d)


_REMAINDER = LowLevelCallable(_overlap_remainder.ctypes)


def _overlap_inner(d: int, m: float, s: float, cfg: QuadratureConfig) -> float:
    """e^-m int_0^m e^r (m (m + s^2) - r^2)^(-d/2) dr."""
    M = m + s * s
    if d == 2:
        c = math.sqrt(m * M)
        A = math.log((c + m) ** 2 / (m * s * s)) / (2 * c)
    else:
        A = 1.0 / (M * math.sqrt(m) * s)
    rem, _ = _quad(_REMAINDER, 0.0, math.sqrt(m), cfg, "overlap inner", args=(m, m * s * s, float(d)))
    return A + rem


def overlap_half(d: int, lo: float, hi: float, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """Integral of G(p, q) over {p >= lo, q >= max(p, hi)}."""
    inner_cfg = cfg.tighter(1e-2)
    mid_cfg = cfg.tighter(1e-1)

    def f_s(s, m):
        if s <= 0.0:
            return 0.0
        return 2.0 * s * math.exp(-(m + s * s)) * _overlap_inner(d, m, s, inner_cfg)

    def f_m(m):
        s0 = math.sqrt(max(hi - m, 0.0))
        return _quad(f_s, s0, s0 + S_TAIL, mid_cfg, "overlap s", args=(m,))[0]

    pts = [hi] if lo < hi < lo + M_TAIL else None
    return _quad(f_m, lo, lo + M_TAIL, cfg, "overlap m", points=pts)


def nested_term(d: int, a: float, b: float, cfg: QuadratureConfig = QuadratureConfig()) -> tuple[float, float]:
    """Contribution of a b-pair nested inside an a-pair (without c_d^2)."""
    if d == 2:
        return _exp_tail(lambda p: math.log(p / b), a, cfg, "nested d=2")
    v, e = _exp_tail(lambda p: math.sqrt(p - b) / p, a, cfg, "nested d=3")
    return 2 * v / math.sqrt(b), 2 * e / math.sqrt(b)


def m2_limit(d: int, a: float, b: float, cfg: QuadratureConfig = QuadratureConfig(),
             form: str = "full") -> MomentResult:
    """lim E[eps^-d M([a,inf)) delta^-d M([b,inf))] for 0 < b <= a.

    form="full" sums all six time orderings; form="literal" evaluates the
    customary bracket (see module notes). Pieces are scaled by c_d^2 and sum
    to the value.
    """
    _check_d(d)
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if b > a:
        raise ValueError("m2_limit expects b <= a")
    if form not in ("full", "literal"):
        raise ValueError(f"unknown form {form!r}")
    k = c_d(d) ** 2
    Ia, eIa = tail_power(d, a, cfg)
    Ib, eIb = tail_power(d, b, cfg)
    nest, enest = nested_term(d, a, b, cfg)
    h_ba, eh_ba = overlap_half(d, b, a, cfg)
    pieces: dict = {}
    errs: list = []
    if form == "full":
        h_aa, eh_aa = overlap_half(d, a, a, cfg)
        g = math.gamma(2 - d / 2)
        pieces["case1"] = k * 2 * Ia * Ib
        pieces["case2"] = k * nest
        pieces["case2_reverse_nesting"] = k * g * Ia
        pieces["case3"] = k * 2 * (h_ba + h_aa)
        errs = [2 * (Ia * eIb + Ib * eIa), enest, g * eIa, 2 * (eh_ba + eh_aa)]
    else:
        E1a, E1b = exp1(a), exp1(b)
        pieces["case1"] = k * 2 * E1a * E1b
        pieces["case2"] = k * nest
        pieces["case3"] = k * 2 * h_ba
        errs = [0.0, enest, 2 * eh_ba]
    value = math.fsum(pieces.values())
    diag = {
        "form": form,
        "prefactor": k,
        "truncation": {"m_tail": M_TAIL, "s_tail": S_TAIL, "bound": math.exp(-M_TAIL)},
        "rel_tol": cfg.rel_tol,
    }
    return MomentResult(value, k * math.fsum(errs), pieces, diag)


def case3_integral(d: int, a: float, b: float, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Integral of G over {p >= a, q >= b}, b <= a."""
    return overlap_half(d, a, a, cfg)[0] + overlap_half(d, b, a, cfg)[0]


def _vlogv(v: float) -> float:
    return v * math.log(v) if v > 0 else 0.0


def case3_upper_bound(d: int, a: float, b: float, cfg: QuadratureConfig = QuadratureConfig()) -> MomentResult:
    """Upper bound on case3_integral from e^r <= e^(p^q), split at p = q.

    d = 2 integrates x log x terms in v = sqrt(q) - sqrt(root), which keeps the
    integrand bounded; d = 3 reduces to arccos forms.
    """
    _check_d(d)
    if not 0 < b <= a:
        raise ValueError("need 0 < b <= a")
    if d == 2:
        def term(root):
            ra = math.sqrt(root)

            def f(v):
                sq = ra + v
                q = sq * sq
                br = sq * math.log(4 * q) - (sq + ra) * math.log(sq + ra) - _vlogv(v)
                # dq = 2 sqrt(q) dv cancels the 1/sqrt(q)
                return 2.0 * math.exp(-q) * br

            # q >= a; for root = b the lower limit v0 = sqrt(a) - sqrt(b)
            v0 = math.sqrt(a) - ra
            return _quad(f, v0, v0 + math.sqrt(M_TAIL), cfg, "case3 bound d=2")
        first, e1 = term(a)
        second, e2 = term(b)
    else:
        def term(root):
            return _exp_tail(lambda q: 2.0 * math.acos(math.sqrt(root / q)) / q, a, cfg, "case3 bound d=3")
        first, e1 = term(a)
        second, e2 = term(b)
    return MomentResult(first + second, e1 + e2, {"p_below_q": first, "q_below_p": second}, {})


# --------------------------------------------------------------------- energy
def energy_threshold(d: int) -> float:
    _check_d(d)
    return 2.0 - d / 2


def _energy_parts(d: int, a: float, b: float) -> tuple[float, float]:
    """Kernel of the alpha-energy bound at a = b + x, as K0 + K1 * w(x).

    w(x) = -log x for d = 2 and x^-1/2 for d = 3; the factor |a-b|^-alpha is
    not included.
    """
    ea = math.exp(-a)
    if d == 2:
        sa, sb = math.sqrt(a), math.sqrt(b)
        k1 = ea / (sa * sb)
        return 0.5 * (2 * ea * math.exp(-b) / (a * b) + ea / b) + 2 * k1 * math.log(sa + sb), k1
    pre = 4.0 / (9.0 * math.pi)
    return pre * 2 * ea * math.exp(-b) / (a * b), pre * (ea / math.sqrt(b ** 3) + 2 * ea / (a * math.sqrt(b)))


def _energy_kernel(d: int, a: float, b: float, x: float) -> float:
    k0, k1 = _energy_parts(d, a, b)
    return k0 + k1 * (-math.log(x) if d == 2 else x ** -0.5)


def energy_bound(d: int, l: float, alpha: float, cfg: QuadratureConfig = QuadratureConfig()) -> MomentResult:
    """Upper bound on E int_{a,b >= l} M_d(da) M_d(db) / |a - b|^alpha.

    Finite exactly for alpha < 2 - d/2. Near the diagonal a = b + z^(1/(1-beta))
    with beta = alpha (d = 2) or alpha + 1/2 (d = 3), so the singular kernel
    becomes bounded, up to a log z term for d = 2.
    """
    thr = energy_threshold(d)
    if not 0 <= alpha < thr:
        raise ValueError(f"alpha must lie in [0, {thr}); the energy diverges beyond")
    if not l > 0:
        raise ValueError("l must be positive")
    beta = alpha if d == 2 else alpha + 0.5
    p = 1.0 / (1.0 - beta)
    e0 = p * (1 - alpha) - 1  # x^-alpha dx = p z^e0 dz
    inner_cfg = cfg.tighter(1e-1)

    def near(b):
        if d == 2:
            # e0 = 0 and -log x = -p log z; the log z factor goes to a QAWS weight
            k0 = _quad(lambda z: _energy_parts(2, b + z ** p, b)[0], 0.0, 1.0, inner_cfg, "energy near")[0]
            k1 = _quad(lambda z: _energy_parts(2, b + z ** p, b)[1], 0.0, 1.0, inner_cfg, "energy near log",
                       weight="alg-loga", wvar=(0.0, 0.0))[0]
            return p * k0 - p * p * k1

        def f(z):
            k0, k1 = _energy_parts(d, b + z ** p, b)
            # x^(-alpha-1/2) dx = p dz exactly
            return p * k0 * z ** e0 + p * k1
        return _quad(f, 0.0, 1.0, inner_cfg, "energy near diagonal")[0]

    def far(b):
        return _quad(lambda x: x ** -alpha * _energy_kernel(d, b + x, b, x), 1.0, np.inf, inner_cfg,
                     "energy far")[0]

    val, err = _exp_tail(lambda b: math.exp(b) * (near(b) + far(b)), l, cfg, "energy outer")
    return MomentResult(val, err, {}, {"alpha": alpha, "l": l, "substitution_power": p})


# ----------------------------------------------------------------- simulation
@njit(cache=True, nogil=True)
def _block_radii(path):
    n = path.shape[0]
    d = path.shape[1]
    K = 1
    while (1 << K) < n:
        K += 1
    rad = np.zeros((K + 1, n))
    # rad[k, j] (j a multiple of 2^k) bounds |B_m - B_j| over m in [j, j + 2^k)
    for k in range(1, K + 1):
        h = 1 << (k - 1)
        for j in range(0, n, 1 << k):
            r = rad[k - 1, j]
            j2 = j + h
            if j2 < n:
                acc = 0.0
                for c in range(d):
                    z = path[j2, c] - path[j, c]
                    acc += z * z
                r2 = math.sqrt(acc) + rad[k - 1, j2]
                if r2 > r:
                    r = r2
            rad[k, j] = r
    return rad


@njit(cache=True, nogil=True)
def _pair_counts(path, ka, kb, eps, delta):
    """Pairs i < j with |B_j - B_i| <= eps and j - i >= ka, and with <= delta and j - i >= kb.

    Requires kb <= ka. Runs of j far from B_i are skipped a dyadic block at a
    time using the block radii.
    """
    n = path.shape[0]
    d = path.shape[1]
    rad = _block_radii(path)
    K = rad.shape[0] - 1
    big = max(eps, delta)
    A = 0
    B = 0
    for i in range(n):
        j = i + kb
        while j < n:
            acc = 0.0
            for c in range(d):
                z = path[j, c] - path[i, c]
                acc += z * z
            r = math.sqrt(acc)
            if r <= big:
                if r <= delta:
                    B += 1
                if r <= eps and j - i >= ka:
                    A += 1
                j += 1
            else:
                gap = r - big
                k = 0
                while k < K and (j & ((1 << (k + 1)) - 1)) == 0 and rad[k + 1, j] < gap:
                    k += 1
                j += 1 << k
    return A, B


def _lag_steps(x: float, dt: float) -> int:
    return int(math.ceil(x / dt - 1e-9))


def mc_span_measure(d: int, a: float, eps: float, grid_step: float, n_replicates: int, seed: int,
                    mode: str = "single", b: Optional[float] = None, delta: Optional[float] = None,
                    threads: int = 1) -> EstimateSummary:
    """Monte Carlo of eps^-d M_{d,eps}([a, inf)) from grid Riemann sums.

    Each replicate draws xi ~ Exp(1) and a Brownian path on the grid of [0, xi],
    then sums grid_step^2 over pairs with lag >= a and distance <= eps.
    mode="product" also forms the sum for (b, delta) on the same path and
    averages the product of the two rescaled sums.
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if mode not in ("single", "product"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "product":
        if b is None or delta is None:
            raise ValueError("product mode needs b and delta")
        if b > a:
            raise ValueError("product mode expects b <= a")
    else:
        b, delta = a, eps
    if not (eps > 0 and delta > 0 and grid_step > 0):
        raise ValueError("eps, delta and grid_step must be positive")
    if grid_step > min(eps, delta) ** 2 / 4 * (1 + 1e-12):
        raise ValueError("grid_step must not exceed eps^2/4")
    if not min(a, b) > grid_step:
        raise ValueError("lags must exceed the grid step")
    ka, kb = _lag_steps(a, grid_step), _lag_steps(b, grid_step)
    sq = math.sqrt(grid_step)

    def one(r):
        g = _rng.substream(seed, r)
        xi = g.exponential()
        n = int(xi / grid_step)
        path = np.zeros((n + 1, d))
        if n:
            np.cumsum(g.standard_normal((n, d)) * sq, axis=0, out=path[1:])
        A, B = _pair_counts(path, ka, kb, eps, delta)
        return A * grid_step ** 2 / eps ** d, B * grid_step ** 2 / delta ** d, xi

    res = np.asarray(_rng.map_ordered(one, range(n_replicates), threads))
    vals = res[:, 0] if mode == "single" else res[:, 0] * res[:, 1]
    diag = {"mode": mode, "d": d, "a": a, "eps": eps, "grid_step": grid_step, "mean_xi": float(res[:, 2].mean())}
    if mode == "product":
        diag.update(b=b, delta=delta, mean_first=float(res[:, 0].mean()), mean_second=float(res[:, 1].mean()))
    return EstimateSummary.from_samples(vals, diag)
