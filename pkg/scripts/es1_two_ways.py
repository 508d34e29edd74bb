"""E S_1 from first-match times and from direct span measure, across walk lengths."""
import argparse
import csv
import sys

from spanset.stats import es1_bounds, estimate_es1

ap = argparse.ArgumentParser()
ap.add_argument("--reps", type=int, default=2000)
ap.add_argument("--seed", type=int, default=2024)
ap.add_argument("--threads", type=int, default=1)
ap.add_argument("--exponents", type=int, nargs="+", default=[10, 12, 14])
args = ap.parse_args()

lo, hi = es1_bounds()
print(f"# bounds [{lo:.6f}, {hi:.6f}]", file=sys.stderr)
w = csv.writer(sys.stdout)
w.writerow(["walk_steps", "method", "estimate", "std_error"])
for k in args.exponents:
    for method in ("formula", "direct"):
        e = estimate_es1(method, args.reps, 2 ** k, args.seed, threads=args.threads)
        w.writerow([2 ** k, method, f"{e.estimate:.6f}", f"{e.std_error:.6f}"])
        sys.stdout.flush()
