"""Distance to the regularized minimizer per iteration on random SPD systems."""

import argparse

import numpy as np

from qgdsim.apps import solve_linear
from qgdsim.instances import random_spd_system


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--systems", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("system,t,distance,rate")
    for k in range(args.systems):
        rep = solve_linear(random_spd_system(rng, args.n), tol=args.tol)
        for it in rep.trace.iterates:
            dist = np.linalg.norm(it.encoded - rep.regularized_minimizer)
            print(f"{k},{it.t},{dist:.6e},{rep.rate:.6f}")


if __name__ == "__main__":
    main()
