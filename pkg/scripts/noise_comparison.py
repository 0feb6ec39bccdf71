"""Modeled success of binary/hard vs one-hot/penalty pipelines over a sweep of
two-qubit error rates."""
import argparse
from pathlib import Path

from qroute.model import load_instance
from qroute.qaoa import compare_pipelines

DATA = Path(__file__).resolve().parent.parent / "data"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instance", nargs="?", default=str(DATA / "tsp2.json"))
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    inst = load_instance(Path(args.instance).read_text())
    print(f"{'eps':>7} {'binary':>8} {'one-hot':>8} {'reduction':>10}")
    for eps in (0.0, 0.001, 0.005, 0.01, 0.02, 0.05):
        comp = compare_pipelines(inst, eps, p=args.p, seed=args.seed)
        red = comp.error_reduction
        print(f"{eps:7.3f} {comp.binary.modeled:8.4f} {comp.standard.modeled:8.4f} "
              f"{'-' if red is None else f'{red:.3f}':>10}")
    print(f"\ngates: binary {comp.binary.result.gates.two_qubit}, one-hot {comp.standard.result.gates.two_qubit}")


if __name__ == "__main__":
    main()
