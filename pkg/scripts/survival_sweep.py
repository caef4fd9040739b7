"""Survival probability of the two-stage contact process as the infection rate varies.

All rates share one master timeline per trial, thinned to each value, so the
survival indicator is monotone in the rate within every trial. Optionally a
classical contact process at the same rates is swept alongside.
"""

import argparse
import csv
import sys

import numpy as np

from latticeips.cli import parse_init, run_sweep
from latticeips.models import TwoStageParams, contact_model, two_stage_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lam", default="0:4:9", help="a:b:steps")
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--delta1", type=float, default=0.0)
    ap.add_argument("--delta2", type=float, default=1.0)
    ap.add_argument("--size", type=int, default=20)
    ap.add_argument("--t", type=float, default=10.0)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--contact", action="store_true", help="also sweep the classical contact process")
    args = ap.parse_args()

    a, b, steps = args.lam.split(":")
    values = np.linspace(float(a), float(b), int(steps)).tolist()
    two = two_stage_model(TwoStageParams(lam=values[-1], gamma=args.gamma, delta1=args.delta1,
                                         delta2=args.delta2, size=args.size))
    names = [f.name for f in two.families if f.name.startswith("infect")]
    rows = run_sweep(two, names, values, args.t, args.seed, parse_init(two, "one-2"),
                     "survival", args.trials, args.jobs)
    header = ["lambda", "two_stage", "two_stage_se"]
    if args.contact:
        cp = contact_model(values[-1], args.delta2, args.size)
        cp_rows = run_sweep(cp, names, values, args.t, args.seed, parse_init(cp, "one-1"),
                            "survival", args.trials, args.jobs)
        header += ["contact", "contact_se"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    for k, (v, mean, se, _) in enumerate(rows):
        row = [v, round(mean, 4), round(se, 4)]
        if args.contact:
            row += [round(cp_rows[k][1], 4), round(cp_rows[k][2], 4)]
        w.writerow(row)


if __name__ == "__main__":
    main()
