"""Exhaustive ground truth for routing optima and QUBO minima."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GuardError
from .model import CvrpInstance, Route, canonical_routes, route_cost

MAX_TSP_NODES = 9
MAX_CVRP_NODES = 7
MAX_QUBO_BITS = 24


@dataclass(frozen=True)
class OracleResult:
    value: float
    argmin: tuple
    """All optimal members, sorted. Routes for TSP, canonical route tuples for
    CVRP, integer bitstrings for QUBO."""


def brute_force_tsp(instance: CvrpInstance) -> OracleResult:
    if instance.vehicles != 1:
        raise ValueError("brute_force_tsp needs a single-vehicle instance")
    if instance.n > MAX_TSP_NODES:
        raise GuardError(f"TSP enumeration refused: n={instance.n} > {MAX_TSP_NODES}")
    best = np.inf
    argmin: list[Route] = []
    for perm in itertools.permutations(range(1, instance.n + 1)):
        c = route_cost(instance, perm)
        if c < best:
            best, argmin = c, [perm]
        elif c == best:
            argmin.append(perm)
    return OracleResult(float(best), tuple(sorted(argmin)))


def _set_partitions(items: list[int], max_blocks: int, max_size: int):
    """Unordered partitions of ``items`` into at most ``max_blocks`` blocks of size <= ``max_size``."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, max_blocks, max_size):
        for k, block in enumerate(part):
            if len(block) < max_size:
                yield part[:k] + [[first, *block]] + part[k + 1:]
        if len(part) < max_blocks:
            yield [[first], *part]


def brute_force_cvrp(instance: CvrpInstance) -> OracleResult:
    """Global CVRP optimum over all capacity-respecting assignments and orders.

    Vehicles are interchangeable, so assignments are enumerated as set
    partitions (which is the relabeling dedup) and each block is ordered
    independently; ties multiply out across blocks.
    """
    n, V, C = instance.n, instance.vehicles, instance.capacity
    if n > MAX_CVRP_NODES:
        raise GuardError(f"CVRP enumeration refused: n={n} > {MAX_CVRP_NODES}")

    @lru_cache(maxsize=None)
    def best_orders(block: tuple[int, ...]) -> tuple[float, tuple[Route, ...]]:
        best, arg = np.inf, []
        for perm in itertools.permutations(block):
            c = route_cost(instance, perm)
            if c < best:
                best, arg = c, [perm]
            elif c == best:
                arg.append(perm)
        return best, tuple(arg)

    best = np.inf
    argmin: set[tuple[Route, ...]] = set()
    for part in _set_partitions(list(range(1, n + 1)), V, C):
        blocks = [tuple(sorted(b)) for b in part]
        parts = [best_orders(b) for b in blocks]
        # same summation as solution_cost, so ties across partitions are exact
        total = math.fsum(p[0] for p in parts)
        if total < best:
            best, argmin = total, set()
        if total == best:
            for combo in itertools.product(*(p[1] for p in parts)):
                argmin.add(canonical_routes(list(combo) + [()] * (V - len(combo))))
    return OracleResult(float(best), tuple(sorted(argmin)))


def qubo_min(model) -> OracleResult:
    q = model.num_qubits
    if q > MAX_QUBO_BITS:
        raise GuardError(f"QUBO enumeration refused: q={q} > {MAX_QUBO_BITS}")
    values = model.values()
    best = values.min()
    argmin = np.flatnonzero(values == best)
    return OracleResult(float(best), tuple(int(i) for i in argmin))
