"""Solver status for regular polygons and for randomly perturbed copies of them."""

import argparse
from collections import Counter

import numpy as np

from rotopulsator.solver import solve_masses


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--min-kick", type=float, default=0.1)
    ap.add_argument("--max-kick", type=float, default=0.5)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    for n in range(3, 9):
        res = solve_masses(2 * np.pi * np.arange(n) / n, np.zeros(n))
        print(f"regular n={n}: {res.status}, masses {np.round(res.masses, 12).tolist()}")
    tally = Counter()
    for _ in range(args.trials):
        n = int(rng.integers(3, 6))
        kick = rng.uniform(args.min_kick, args.max_kick, n) * rng.choice([-1, 1], n)
        res = solve_masses(2 * np.pi * np.arange(n) / n + kick, np.zeros(n))
        tally[(n, res.status)] += 1
    for (n, status), count in sorted(tally.items()):
        print(f"perturbed n={n}: {status} x{count}")


if __name__ == "__main__":
    main()
