"""Qubit counts for one-hot vs binary CVRP encodings, plus hardware crossover lines.

    python scripts/qubit_scaling.py --vehicles 7 --capacity 20 --n-max 140 --paper-mode
"""
import argparse

from qroute.cli import HARDWARE_LINES, max_nodes_fitting, scaling_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vehicles", type=int, default=7)
    ap.add_argument("--capacity", type=int, default=20)
    ap.add_argument("--n-max", type=int, default=140)
    ap.add_argument("--paper-mode", action="store_true")
    args = ap.parse_args()

    print(f"{'n':>5} {'one-hot':>9} {'binary':>8}")
    for n, one, binary in scaling_rows(args.vehicles, args.capacity, 1, args.n_max, args.paper_mode):
        if n in (1, 2, 4, 8, 16, 32, 64, 100, 128) or n == args.n_max:
            print(f"{n:>5} {one:>9} {binary:>8}")
    print()
    for hw in HARDWARE_LINES:
        one = max_nodes_fitting("onehot", hw, args.vehicles, args.capacity, args.paper_mode)
        binary = max_nodes_fitting("binary", hw, args.vehicles, args.capacity, args.paper_mode)
        print(f"{hw:>5} qubits: one-hot fits n <= {one}, binary fits n <= {binary}")


if __name__ == "__main__":
    main()
