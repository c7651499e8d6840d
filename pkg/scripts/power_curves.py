"""Cumulative power of the conditional vs standard detector for one scenario family.

    python scripts/power_curves.py immediate --values 0.5 1 2
    python scripts/power_curves.py delayed --values 200 400 600
    python scripts/power_curves.py gradual --values 0.001 0.002 0.005
"""
import argparse
import csv

from condctm.detector import DetectorConfig
from condctm.sim import Scenario, aggregate_power, compare_variants, stopping_summary

parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
parser.add_argument("family", choices=["immediate", "delayed", "gradual"])
parser.add_argument("--values", type=float, nargs="+", required=True)
parser.add_argument("--n-ref", type=int, default=1000)
parser.add_argument("--trials", type=int, default=100)
parser.add_argument("--horizon", type=int, default=1000)
parser.add_argument("--shift", type=float, default=2.0, help="post-change mean for the delayed family")
parser.add_argument("--seed", type=int, default=0)
parser.add_argument("--out", default="power_curves.csv")
args = parser.parse_args()


def scenario(value):
    if args.family == "immediate":
        return Scenario.immediate_shift(value, args.horizon)
    if args.family == "delayed":
        return Scenario.delayed_shift(int(value) + 1, args.shift, int(value) + args.horizon)
    return Scenario.gradual(value, args.horizon)


variants = ["conditional", "standard"]
with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["family", "value", "t", *variants])
    for value in args.values:
        res = compare_variants(scenario(value), DetectorConfig(), variants, args.n_ref, args.trials, args.seed)
        curves = {v: aggregate_power(r) for v, r in res.items()}
        for i, t in enumerate(curves["conditional"].times):
            w.writerow([args.family, value, int(t), *(curves[v].power[i] for v in variants)])
        for v in variants:
            print(args.family, value, v, stopping_summary(res[v]))
