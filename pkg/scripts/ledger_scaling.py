"""Primitive-query totals of type-1 descents against T, for several K.

Counts grow by a factor of a few hundred per iteration, so they are printed as log10.
"""

import argparse
import math

import numpy as np

from qgdsim.instances import random_spec
from qgdsim.objective import Family
from qgdsim.qgd import default_schedule, run_descent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--max-T", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("K,T,log10_primitive_queries,step_ratio")
    for K in (1, 2, 3, 4):
        spec = random_spec(rng, Family.SUM_POWERS, args.n, K)
        prev = None
        for T in range(1, args.max_T + 1):
            total = run_descent(spec, default_schedule(spec, T)).ledger.total()
            ratio = "" if prev is None else f"{total / prev:.1f}"
            print(f"{K},{T},{math.log10(total):.3f},{ratio}")
            prev = total


if __name__ == "__main__":
    main()
