"""Type-I error of the conditional and invalid detectors across reference sizes."""
import argparse
import csv

import numpy as np

from condctm.detector import DetectorConfig
from condctm.sim import Scenario, run_trials

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--trials", type=int, default=500)
parser.add_argument("--horizon", type=int, default=5000)
parser.add_argument("--sizes", type=int, nargs="+", default=[20, 100, 500, 1000, 2000])
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="type1_vs_n.csv")
args = parser.parse_args()

with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["n_ref", "variant", "rejection_rate"])
    for n in args.sizes:
        for variant in ("conditional", "invalid"):
            trials = run_trials(Scenario.null(args.horizon), DetectorConfig(variant=variant), n,
                                args.trials, args.seed, with_regret=False)
            rate = np.mean([t.tau is not None for t in trials])
            w.writerow([n, variant, rate])
            print(f"n={n:5d} {variant:12s} {rate:.3f}")
