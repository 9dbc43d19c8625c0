"""Average loop counts of the power, phase and gain ascents.

Counts are taken from the first call of each block in an optimisation run
(later outer iterations start next to a fixed point and exit after one or
two loops).
"""

import argparse

import numpy as np

from activeris import SystemConfig
from activeris.orchestrator import PLANS
from activeris.simulation import ScenarioSpec, run_scenario

CASES = [
    ("power", dict(K=5), "N", 60),
    ("power", dict(K=10), "N", 60),
    ("phases", dict(K=5), "N", 30),
    ("phases", dict(K=5), "N", 80),
    ("gains", dict(K=5), "N", 30),
    ("gains", dict(K=5), "N", 80),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=50)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'block':8s} {'K':>3s} {'N':>4s} {'mean loops':>11s}")
    for block, kw, var, value in CASES:
        spec = ScenarioSpec(SystemConfig(**kw), var, (value,), (PLANS["active_optimized"],),
                            args.trials, args.seed)
        (pt,) = run_scenario(spec, workers=args.workers).points
        print(f"{block:8s} {kw['K']:3d} {value:4d} {pt.mean_loops[block]:11.1f}")


if __name__ == "__main__":
    main()
