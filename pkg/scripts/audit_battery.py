#!/usr/bin/env python3
"""Run the randomized inequality audits in one go and print a summary.

    python scripts/audit_battery.py --cases 2000 --resolution 10
"""

import argparse
import math

import numpy as np

from mgale import martingale as mg
from mgale.dilated import contraction_audit, contraction_refined_audit
from mgale.modulus import dyadic_approx_audit_all
from mgale.torus import GridFunction, sine_series


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cases", type=int, default=2000)
    ap.add_argument("--resolution", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    ps = [1.5, 2, 3, 4, 8]
    J = args.resolution

    for name, batch in (
        ("rio", mg.rio_audit_batch(args.cases, ps, J, args.seed)),
        ("doob", mg.doob_audit_batch(args.cases, ps, J, args.seed + 1)),
    ):
        worst = min(r.margin for r in batch)
        fails = sum(not r.passed for r in batch)
        print(f"{name:12s} {len(batch):6d} cases  failures {fails}  smallest margin {worst:.3e}")

    rng = np.random.default_rng(args.seed + 2)
    arr = mg.random_grid_functions(max(10, args.cases // 20), J, rng, "trig")
    fails = 0
    count = 0
    for row in arr:
        for p in (1.5, 2, 4, math.inf):
            reps = dyadic_approx_audit_all(GridFunction(J, row, "real"), p)
            fails += sum(not r.passed for r in reps)
            count += len(reps)
    print(f"{'dyadic':12s} {count:6d} cases  failures {fails}")

    fails = count = 0
    for i in range(max(10, args.cases // 10)):
        deg = int(rng.integers(1, 33))
        f = sine_series({int(m): float(a) for m, a in zip(rng.integers(1, 65, deg), rng.standard_normal(deg))})
        mmax = max(1, (2 ** (J - 1) - 1) // f.max_frequency)
        m = int(rng.integers(1, mmax + 1))
        n = int(rng.integers(0, J - 1))
        p = ps[i % len(ps)]
        fails += not contraction_audit(f, m, n, min(p, 4), J).passed
        fails += not contraction_refined_audit(f, m, n, J).passed
        count += 2
    print(f"{'contraction':12s} {count:6d} cases  failures {fails}")


if __name__ == "__main__":
    main()
