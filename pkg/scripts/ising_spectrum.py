"""Ground and first excited energies of open Ising chains from shifted descent."""

import argparse

import numpy as np

from qgdsim import oracle
from qgdsim.apps import IsingModel, ising_excited_state, ising_ground_state


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--chains", type=int, default=5, help="random couplings per chain length")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print("N,J,E0,E0_descent,E1,E1_descent,steps_ground,steps_excited")
    for N in (2, 3):
        for _ in range(args.chains):
            J = tuple(np.round(rng.uniform(-1, 1, N - 1), 3))
            model = IsingModel(J)
            w, _ = oracle.dense_eig(oracle.ising_hamiltonian(J))
            ground = ising_ground_state(model)
            excited = ising_excited_state(model, ground)
            js = " ".join(f"{j:g}" for j in J)
            print(
                f"{N},{js},{w[0]:.6f},{ground.energy:.6f},{w[1]:.6f},{excited.energy:.6f},"
                f"{ground.trace.schedule.T},{excited.trace.schedule.T}"
            )


if __name__ == "__main__":
    main()
