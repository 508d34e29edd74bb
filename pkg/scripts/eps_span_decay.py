"""Median eps-span measure on [0.05, 1] as eps shrinks, for d = 1, 2, 3."""
import argparse
import csv
import sys

from spanset.acceptance import eps_span_medians

ap = argparse.ArgumentParser()
ap.add_argument("--seed", type=int, default=13)
ap.add_argument("--seeds", type=int, default=20)
args = ap.parse_args()

eps = (0.2, 0.1, 0.05, 0.025, 0.0125)
w = csv.writer(sys.stdout)
w.writerow(["d"] + [f"eps={e}" for e in eps])
for d in (1, 2, 3):
    med = eps_span_medians(d, args.seed, n_seeds=args.seeds, eps_levels=eps)
    w.writerow([d] + [f"{m:.4f}" for m in med])
