"""Command-line front end. Every subcommand writes an ExperimentReport.

Exit codes: 0 success, 2 bad arguments, 3 quadrature did not converge.

CSV columns by command:
  gen            step, x1[, x2, x3]
  span pl/eps    lo, hi
  span lattice   lag
  stats fdist    bin_lo, bin_hi, count
  stats excursions  statistic, bin_lo, bin_hi, count
  stats es1/capacity, moments *   quantity, value
  dim            seed_index, scale, count
  converge       parameter, median, q25, q75, n_seeds
  hausdorff      quantity, value
  repro          criterion, passed, seconds, title
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import __version__
from . import acceptance
from .dimension import DimensionConfig, dimension_pipeline
from .intervals import IntervalSet
from .metric import ConvergenceConfig, convergence_experiment, hausdorff_distance
from .moments import (NonConvergenceError, QuadratureConfig, energy_bound, m1_asymptotic, m1_exact, m2_limit,
                      mc_span_measure)
from .paths import PiecewiseLinearPath, gen_gaussian_path, gen_srw, knight_walk, to_pl
from .report import ExperimentReport
from .spans import eps_span_grid, span_lattice, span_pl_1d
from .stats import (capacity_estimate, estimate_es1, estimate_r0, f_cdf, ks_distance_unit, longest_excursions,
                    sample_first_match)
from . import rng as _rng


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    p.add_argument("--out", default=None, help="report file, or directory for <command>.<ext>")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    p.add_argument("--tol", type=float, default=None, help="relative quadrature tolerance")
    return p


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI")
    return lo, hi


def _intervals(text: str) -> IntervalSet:
    items = []
    for part in text.split(";"):
        try:
            lo, hi = (float(v) for v in part.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError("expected LO,HI[;LO,HI...]")
        items.append((lo, hi))
    return IntervalSet.from_intervals(items)


def _cfg(args) -> QuadratureConfig:
    if args.tol is None:
        return QuadratureConfig()
    return QuadratureConfig(rel_tol=args.tol, abs_tol=1e-4 * args.tol)


def _kv_rows(d: dict, prefix: str = ""):
    for k, v in d.items():
        if isinstance(v, dict):
            yield from _kv_rows(v, f"{prefix}{k}.")
        elif isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool):
            yield [prefix + str(k), v]


def _hist(x, bins, lo, hi):
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    return [[float(edges[i]), float(edges[i + 1]), int(counts[i])] for i in range(bins)]


# ---------------------------------------------------------------- commands
def cmd_gen(args):
    if args.kind == "srw":
        w = gen_srw(args.d, args.steps, args.seed)
        vals = w.positions
        res = {"kind": "srw", "n_steps": w.n_steps, "final": vals[-1].tolist(), "positions": vals.tolist()}
    elif args.kind == "knight":
        w = knight_walk(args.level, args.horizon, args.seed)
        vals = w.values.reshape(-1, 1)
        res = {"kind": "knight", "level": args.level, "n_steps": w.n_steps, "positions": vals.tolist()}
    else:
        p = gen_gaussian_path(args.d, args.horizon, args.dt, args.seed)
        vals = p.values
        res = {"kind": "gaussian", "grid_step": args.dt, "horizon": args.horizon, "values": vals.tolist()}
    header = ["step"] + [f"x{i + 1}" for i in range(vals.shape[1])]
    rows = [[i, *r] for i, r in enumerate(vals.tolist())]
    head = f"{res['kind']} path with {vals.shape[0] - 1} steps"
    return head, res, header, rows


def _iv_rows(S: IntervalSet):
    return [[float(a), float(b)] for a, b in zip(S.lo, S.hi)]


def cmd_span(args):
    if args.kind == "pl":
        if args.demo == "ex2":
            path = acceptance.ex2_path()
        elif args.demo == "ex2n":
            path = acceptance.ex2_perturbed(args.n)
        elif args.path:
            data = np.loadtxt(args.path, delimiter=",", ndmin=2)
            path = PiecewiseLinearPath(data[:, 0], data[:, 1])
        else:
            path = to_pl(gen_srw(1, args.steps, args.seed), 1.0 / args.steps)
        S = span_pl_1d(path)
        res = {"spans": S.to_json_obj(), "measure": S.measure(), "n_components": S.n_components}
        return str(S), res, ["lo", "hi"], _iv_rows(S)
    if args.kind == "lattice":
        w = gen_srw(args.d, args.steps, args.seed)
        sp = span_lattice(w)
        res = {"d": args.d, "n_steps": w.n_steps, "n_spans": int(sp.lags.size), "lags": sp.lags.tolist()}
        return f"{sp.lags.size} lattice spans out of {w.n_steps + 1} lags", res, ["lag"], [[int(k)] for k in sp.lags]
    p = gen_gaussian_path(args.d, args.horizon, args.dt, args.seed)
    S = eps_span_grid(p, args.eps, args.window)
    res = {"d": args.d, "eps": args.eps, "window": list(args.window), "measure": S.measure(),
           "n_components": S.n_components, "spans": S.to_json_obj()}
    return f"eps-span measure {S.measure():.6g} in {S.n_components} components", res, ["lo", "hi"], _iv_rows(S)


def cmd_stats(args):
    kind = args.kind
    if kind == "es1":
        e = estimate_es1(args.method, args.reps, args.steps, args.seed, lag=args.lag, threads=args.threads)
        res = e.to_json_obj()
        return f"E S_1 ~ {e.estimate:.5f} +- {e.std_error:.5f}", res, ["quantity", "value"], list(_kv_rows(res))
    if kind == "fdist":
        F = sample_first_match(args.n, args.reps, args.steps, args.seed, threads=args.threads, upto=1.0)
        x = np.where(F < 0, np.inf, F / args.n)
        below = x[x <= 1]
        ks = ks_distance_unit(x)
        hist = _hist(below, args.bins, 0.0, 1.0)
        res = {"n": args.n, "ks_distance_on_unit": ks, "fraction_above_1": float(np.mean(x > 1)),
               "reference_fraction_above_1": 1 - f_cdf(1.0), "histogram": hist}
        return f"KS distance on [0,1]: {ks:.5f}", res, ["bin_lo", "bin_hi", "count"], hist
    if kind == "excursions":
        seeds = _rng.replicate_seeds(args.seed, args.reps)
        out = np.asarray(_rng.map_ordered(lambda s: longest_excursions(gen_srw(1, args.steps, s)), seeds,
                                          args.threads), dtype=float) / args.steps
        r0 = estimate_r0(args.reps, args.steps, args.seed, args.threads)
        hist = {"R": _hist(out[:, 0], args.bins, 0, 1), "R0": _hist(out[:, 1], args.bins, 0, 1)}
        res = {"mean_R": float(out[:, 0].mean()), "R0": r0.to_json_obj(), "histogram": hist}
        rows = [[k, *r] for k in ("R", "R0") for r in hist[k]]
        return (f"mean R/N {out[:, 0].mean():.5f}, mean R0/N {r0.estimate:.5f} +- {r0.std_error:.5f}", res,
                ["statistic", "bin_lo", "bin_hi", "count"], rows)
    e = capacity_estimate(args.K, args.reps, args.steps, args.seed, args.threads)
    res = e.to_json_obj()
    return f"P(span meets K) ~ {e.estimate:.5f} +- {e.std_error:.5f}", res, ["quantity", "value"], list(_kv_rows(res))


def cmd_dim(args):
    cfg = DimensionConfig(args.d, n_steps=args.steps, n_seeds=args.seeds, window=args.window)
    r = dimension_pipeline(cfg, args.seed, args.threads)
    rows = [[i, s, c] for i, t in enumerate(r.tables) for s, c in t.rows]
    return (f"box-count slope {r.mean_slope:.4f} +- {r.std_error:.4f} (d={args.d})", r.to_json_obj(),
            ["seed_index", "scale", "count"], rows)


def cmd_moments(args):
    cfg = _cfg(args)
    if args.kind == "m1":
        if args.eps is None:
            v = m1_asymptotic(args.d, args.a, cfg)
            res = {"value": v, "kind": "asymptotic"}
        else:
            res = m1_exact(args.d, args.a, args.eps, cfg).to_json_obj()
        head = f"m1 = {res['value']:.12g}"
    elif args.kind == "m2":
        r = m2_limit(args.d, args.a, args.b, cfg, form=args.form)
        res = r.to_json_obj()
        head = f"m2 = {r.value:.12g}"
    elif args.kind == "energy":
        r = energy_bound(args.d, args.l, args.alpha, cfg)
        res = r.to_json_obj()
        head = f"energy bound = {r.value:.12g}"
    else:
        mode = "single" if args.b is None else "product"
        e = mc_span_measure(args.d, args.a, args.eps or 0.05, args.dt, args.reps, args.seed, mode=mode, b=args.b,
                            delta=args.delta if args.b is not None else None, threads=args.threads)
        res = e.to_json_obj()
        head = f"MC {mode} = {e.estimate:.6g} +- {e.std_error:.2g}"
    return head, res, ["quantity", "value"], list(_kv_rows(res))


def cmd_hausdorff(args):
    A, B = args.A, args.B
    d = hausdorff_distance(A, B)
    res = {"A": A.to_json_obj(), "B": B.to_json_obj(), "distance": d}
    return f"{d:.17g}", res, ["quantity", "value"], [["distance", d]]


def cmd_converge(args):
    cfg = ConvergenceConfig(levels=tuple(args.levels), fine_level=args.fine_level, horizon=args.horizon,
                            n_seeds=args.seeds, coupling=args.coupling)
    rows = convergence_experiment(cfg, args.seed, args.threads)
    res = {"coupling": cfg.coupling, "rows": [{"level": r.level, "n_steps": r.n_steps, "median": r.median,
                                               "q25": r.q25, "q75": r.q75, "distances": r.distances}
                                              for r in rows]}
    head = "median d_H by level: " + ", ".join(f"{r.level}:{r.median:.4g}" for r in rows)
    return head, res, ["parameter", "median", "q25", "q75", "n_seeds"], \
        [[r.level, r.median, r.q25, r.q75, r.n_seeds] for r in rows]


def cmd_repro(args):
    nums = args.only or sorted(acceptance.CHECKS)
    out = acceptance.run_checks(nums, echo=lambda s: print(s, flush=True))
    n_ok = sum(r.passed for r in out)
    res = {"passed": n_ok, "total": len(out), "criteria": [r.to_json_obj() for r in out]}
    rows = [[r.number, r.passed, round(r.seconds, 3), r.title] for r in out]
    return f"{n_ok}/{len(out)} criteria passed", res, ["criterion", "passed", "seconds", "title"], rows


# ------------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="spanset", description="Span sets of Brownian paths and random walks.")
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name, fn, help_):
        p = parent.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = leaf(sub, "gen", cmd_gen, "generate a path")
    p.add_argument("kind", choices=("srw", "gaussian", "knight"))
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--level", type=int, default=5)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)

    sp = sub.add_parser("span", help="span sets").add_subparsers(dest="kind", required=True, parser_class=_Parser)
    p = leaf(sp, "pl", cmd_span, "exact spans of a piecewise-linear path")
    p.add_argument("--demo", choices=("ex2", "ex2n"))
    p.add_argument("--n", type=int, default=4, help="perturbation index for ex2n")
    p.add_argument("--path", help="CSV of time,value breakpoints")
    p.add_argument("--steps", type=int, default=1000, help="interpolated random walk when no path is given")
    p = leaf(sp, "lattice", cmd_span, "exact spans of a lattice walk")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--steps", type=int, default=1000)
    p = leaf(sp, "eps", cmd_span, "eps-span set of a sampled Brownian path")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--window", type=_window, default=(0.05, 1.0))

    def add_fdist(p):
        p.add_argument("--n", type=int, default=2000)
        p.add_argument("--steps", type=int, default=10 ** 6)
        p.add_argument("--reps", type=int, default=10 ** 4)
        p.add_argument("--bins", type=int, default=20)

    st = sub.add_parser("stats", help="span statistics").add_subparsers(dest="kind", required=True,
                                                                         parser_class=_Parser)
    p = leaf(st, "es1", cmd_stats, "expected span measure on [0,1]")
    p.add_argument("--method", choices=("formula", "direct"), default="formula")
    p.add_argument("--reps", type=int, default=10 ** 4)
    p.add_argument("--steps", type=int, default=2 ** 15)
    p.add_argument("--lag", type=int, default=None)
    add_fdist(leaf(st, "fdist", cmd_stats, "law of the first-match time"))
    p = leaf(st, "excursions", cmd_stats, "longest excursions")
    p.add_argument("--reps", type=int, default=10 ** 4)
    p.add_argument("--steps", type=int, default=10 ** 4)
    p.add_argument("--bins", type=int, default=20)
    p = leaf(st, "capacity", cmd_stats, "probability that the span set meets K")
    p.add_argument("--K", type=_intervals, required=True, help="LO,HI[;LO,HI...] inside [0,1]")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--steps", type=int, default=10 ** 4)
    p = leaf(sub, "fdist", cmd_stats, "alias of stats fdist")
    p.set_defaults(kind="fdist")
    add_fdist(p)

    p = leaf(sub, "dim", cmd_dim, "box-count slope of lattice spans")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--steps", type=int, default=10 ** 6)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--window", type=_window, default=(0.05, 1.0))

    mo = sub.add_parser("moments", help="moment and energy integrals").add_subparsers(dest="kind", required=True,
                                                                                       parser_class=_Parser)
    for name, help_ in (("m1", "first moment"), ("m2", "second-moment limit"), ("energy", "energy bound"),
                        ("mc", "simulated span measure")):
        p = leaf(mo, name, cmd_moments, help_)
        p.add_argument("--d", type=int, default=2)
        if name != "energy":
            p.add_argument("--a", type=float, default=1.0)
        if name in ("m1", "mc"):
            p.add_argument("--eps", type=float, default=None)
        if name in ("m2", "mc"):
            p.add_argument("--b", type=float, default=0.5 if name == "m2" else None)
        if name == "m2":
            p.add_argument("--form", choices=("full", "literal"), default="full")
        if name == "energy":
            p.add_argument("--l", type=float, default=1.0)
            p.add_argument("--alpha", type=float, default=0.0)
        if name == "mc":
            p.add_argument("--delta", type=float, default=0.05)
            p.add_argument("--dt", type=float, default=5e-4)
            p.add_argument("--reps", type=int, default=2000)

    p = leaf(sub, "hausdorff", cmd_hausdorff, "Hausdorff distance between two finite unions of intervals")
    p.add_argument("A", type=_intervals)
    p.add_argument("B", type=_intervals)

    p = leaf(sub, "converge", cmd_converge, "coupled convergence of rescaled lattice spans")
    p.add_argument("--levels", type=int, nargs="+", default=[4, 5, 6, 7, 8])
    p.add_argument("--fine-level", type=int, default=10)
    p.add_argument("--horizon", type=float, default=2.0)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--coupling", choices=("knight", "independent"), default="knight")

    p = leaf(sub, "repro", cmd_repro, "run the acceptance checks and summarize")
    p.add_argument("--only", type=int, nargs="+", choices=range(1, 15), default=None)
    return top


def _target(out: str, name: str, ext: str) -> str:
    if os.path.isdir(out) or out.endswith(os.sep):
        os.makedirs(out, exist_ok=True)
        return os.path.join(out, f"{name}.{ext}")
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    name = args.command + (f" {args.kind}" if getattr(args, "kind", None) and args.command != "fdist" else "")
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command", "out", "format", "threads")}
    t0 = time.perf_counter()
    try:
        head, results, header, rows = args.func(args)
    except NonConvergenceError as e:
        print(f"spanset: quadrature did not converge: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"spanset: {e}", file=sys.stderr)
        return 2
    rep = ExperimentReport(name, params, args.seed, results, time.perf_counter() - t0, __version__, header, rows)
    print(head)
    if args.out:
        ext = args.format
        text = rep.to_json() if ext == "json" else rep.to_csv()
        with open(_target(args.out, name.replace(" ", "_"), ext), "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
