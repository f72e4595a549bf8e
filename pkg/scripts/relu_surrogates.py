"""Tabulate the quadratic and quartic ReLU surrogates on [-1, 1] and their max errors."""

import argparse

import numpy as np

from qgdsim.apps import QUADRATIC_RELU, QUARTIC_RELU
from qgdsim.oracle import poly_activation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=21, help="rows to print")
    args = ap.parse_args()
    quad, quart = poly_activation(QUADRATIC_RELU), poly_activation(QUARTIC_RELU)
    grid = np.linspace(-1, 1, 10**4)
    relu = np.maximum(grid, 0.0)
    print(f"# max error quadratic {np.max(np.abs(quad(grid) - relu)):.6f}")
    print(f"# max error quartic   {np.max(np.abs(quart(grid) - relu)):.6f}")
    print("x,relu,quadratic,quartic")
    for x in np.linspace(-1, 1, args.points):
        print(f"{x:.3f},{max(x, 0.0):.6f},{quad(x):.6f},{quart(x):.6f}")


if __name__ == "__main__":
    main()
