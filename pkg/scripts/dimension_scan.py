"""Box-count slopes of lattice spans for d = 2, 3 as the walk length grows."""
import argparse
import csv
import sys

from spanset.dimension import DimensionConfig, dimension_pipeline

ap = argparse.ArgumentParser()
ap.add_argument("--seed", type=int, default=12)
ap.add_argument("--seeds", type=int, default=20)
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

w = csv.writer(sys.stdout)
w.writerow(["d", "n_steps", "mean_slope", "std_error", "seeds_without_spans"])
for d in (2, 3):
    for n in (10 ** 4, 10 ** 5, 10 ** 6):
        r = dimension_pipeline(DimensionConfig(d, n_steps=n, n_seeds=args.seeds), args.seed, args.threads)
        w.writerow([d, n, f"{r.mean_slope:.4f}", f"{r.std_error:.4f}", r.n_empty])
        sys.stdout.flush()
