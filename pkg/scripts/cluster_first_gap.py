"""Cluster-first CVRP on random small instances; reports the gap to the exact optimum."""
import argparse

from qroute.model import generate_instance
from qroute.oracle import brute_force_cvrp
from qroute.qaoa import QaoaConfig, solve_cvrp_cluster_first


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--vehicles", type=int, default=2)
    ap.add_argument("--capacity", type=int, default=3)
    args = ap.parse_args()

    config = QaoaConfig(p=1, restarts=2)
    gaps = []
    for seed in range(args.instances):
        inst = generate_instance(seed, args.n, args.vehicles, args.capacity)
        res = solve_cvrp_cluster_first(inst, config)
        opt = brute_force_cvrp(inst).value
        gap = (res.solution.cost - opt) / opt
        gaps.append(gap)
        print(f"seed {seed:3d} clusters {res.clusters} cost {res.solution.cost:8.3f} "
              f"optimum {opt:8.3f} gap {gap:6.3f}")
    print(f"mean gap {sum(gaps) / len(gaps):.4f}, max {max(gaps):.4f}")


if __name__ == "__main__":
    main()
