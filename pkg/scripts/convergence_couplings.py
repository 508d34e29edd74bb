"""Hausdorff distance to the fine reference under Knight and independent couplings."""
import argparse
import sys

from spanset.metric import ConvergenceConfig, convergence_experiment, rows_to_csv

ap = argparse.ArgumentParser()
ap.add_argument("--seed", type=int, default=14)
ap.add_argument("--seeds", type=int, default=50)
ap.add_argument("--threads", type=int, default=1)
args = ap.parse_args()

for coupling in ("knight", "independent"):
    rows = convergence_experiment(ConvergenceConfig(n_seeds=args.seeds, coupling=coupling), args.seed, args.threads)
    print(f"# {coupling}")
    sys.stdout.write(rows_to_csv(rows))
