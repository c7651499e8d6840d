"""Power of the conditional detector for several clipping thresholds."""
import argparse
import csv
from dataclasses import replace

from condctm.detector import DetectorConfig
from condctm.sim import Scenario, aggregate_power, run_trials

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--clips", type=float, nargs="+", default=[0.0, 0.05, 0.1, 0.2])
parser.add_argument("--delay", type=int, default=200, help="0 for an immediate change")
parser.add_argument("--after", type=int, default=300, help="steps simulated after the change")
parser.add_argument("--variant", default="conditional", choices=["conditional", "standard"])
parser.add_argument("--trials", type=int, default=100)
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="clipping.csv")
args = parser.parse_args()

sc = Scenario.delayed_shift(args.delay + 1, 2.0, args.delay + args.after)
curves = {
    c: aggregate_power(run_trials(sc, replace(DetectorConfig(variant=args.variant), clip=c), 1000,
                                  args.trials, args.seed, with_regret=False))
    for c in args.clips
}
with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["t_after_change", *(f"clip={c}" for c in args.clips)])
    for t in range(args.delay + 1, sc.horizon + 1):
        w.writerow([t - args.delay, *(curves[c].at(t) for c in args.clips)])
for c in args.clips:
    print(f"clip={c:<5} power +10: {curves[c].at(args.delay + 10):.2f}  +30: {curves[c].at(args.delay + 30):.2f}"
          f"  end: {curves[c].at(sc.horizon):.2f}")
