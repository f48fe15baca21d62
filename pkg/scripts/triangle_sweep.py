"""Move one vertex of a triangle around the circle and list the feasible positions."""

import argparse

import numpy as np

from rotopulsator.errors import SingularConfiguration
from rotopulsator.solver import solve_masses


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=360)
    args = ap.parse_args()

    feasible, singular = [], []
    for k in range(args.cells):
        x = 2 * np.pi * k / args.cells
        try:
            res = solve_masses([0.0, 2 * np.pi / 3, x], np.zeros(3))
        except SingularConfiguration:
            singular.append(k)
            continue
        if res.feasible:
            feasible.append((k, res.masses))
    print(f"singular cells: {singular}")
    for k, m in feasible:
        print(f"feasible cell {k} (alpha3 = {360 * k / args.cells:g} deg): masses {np.round(m, 12).tolist()}")


if __name__ == "__main__":
    main()
