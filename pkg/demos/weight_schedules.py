#!/usr/bin/env python3
"""Plot (in ASCII) the boost weight w_t for the three schedule kinds.

The increasing schedule starts at exactly zero, so the first step is never
boosted, and saturates at gamma with rate lambda; the decreasing schedule
starts at gamma and fades; constant is constant. The convergence column
shows the first step where the increasing schedule sits within 1e-6 of
gamma.
"""

import argparse

from logit_anchor import WeightSchedule, weight_at

WIDTH = 48


def spark(value, gamma):
    return "#" * round(WIDTH * value / gamma) if gamma else ""


def main(args):
    kinds = ("increasing", "decreasing", "constant")
    schedules = {k: WeightSchedule(k, gamma=args.gamma, lam=args.lam) for k in kinds}

    print(f"gamma={args.gamma} lambda={args.lam}")
    inc = schedules["increasing"]
    print(f"increasing schedule converges at step {inc.converged_step()}\n")

    steps = [0, 1, 2, 5, 10, 20, 40, 80, 160, 320]
    for kind in kinds:
        sched = schedules[kind]
        print(kind)
        for t in steps:
            w = weight_at(sched, t)
            print(f"  t={t:<4} w={w:8.5f} |{spark(w, args.gamma)}")
        print()


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--gamma", type=float, default=0.3)
    parser.add_argument("--lam", "--lambda", type=float, default=0.05, dest="lam")
    main(parser.parse_args())
