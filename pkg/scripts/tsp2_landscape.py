"""Depot plus two nodes under the binary encoding with the swap mixer.

Prints the optimum found by the optimizer and a coarse map of P_opt over the
(phase, mixer) angle plane at p = 1.
"""
import argparse

import numpy as np

from qroute import engine
from qroute.model import CvrpInstance
from qroute.qaoa import Problem, QaoaConfig, optimize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=12)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    inst = CvrpInstance("tsp2", 2, [[0, 1, 4], [2, 0, 1], [1, 3, 0]], 1, 2)
    config = QaoaConfig(seed=args.seed)
    res = optimize(config, inst)
    print(f"best route {res.best_solution.routes[0]} cost {res.best_solution.cost:g}")
    print(f"P_opt {res.p_opt:.6f} at gamma={res.gammas[0]:.4f} theta={res.thetas[0]:.4f}")
    print(f"two-qubit gates {res.gates.two_qubit}, qubits {res.num_qubits}")

    problem = Problem(config, inst)
    axis = np.linspace(0, np.pi, args.steps, endpoint=False)
    print("\nP_opt, rows gamma, columns theta")
    for g in axis:
        row = [engine.probabilities(problem.evolve([g, t]))[problem.optimal_indices].sum() for t in axis]
        print(f"{g:5.2f} " + " ".join(f"{p:4.2f}" for p in row))


if __name__ == "__main__":
    main()
