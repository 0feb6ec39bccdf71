"""Routing instances, solutions, classical costs and the clustering step."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

Route = tuple[int, ...]

_INSTANCE_FIELDS = {"name", "n", "vehicles", "capacity", "matrix", "coords"}


@dataclass(frozen=True, eq=False)
class CvrpInstance:
    """Depot (index 0) plus ``n`` nodes, ``vehicles`` vehicles of ``capacity`` stops each."""

    name: str
    n: int
    cost: np.ndarray
    vehicles: int = 1
    capacity: int | None = None
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        cost = np.array(self.cost, dtype=float)
        if self.capacity is None:
            object.__setattr__(self, "capacity", self.n)
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if cost.shape != (self.n + 1, self.n + 1):
            raise ValueError(
                f"dimension mismatch: cost matrix is {cost.shape}, expected {(self.n + 1, self.n + 1)}"
            )
        if not np.all(np.isfinite(cost)):
            raise ValueError("cost matrix has non-finite entries")
        if np.any(cost < 0):
            raise ValueError("negative cost")
        if np.any(np.diag(cost) != 0):
            raise ValueError("nonzero diagonal")
        if self.vehicles < 1 or self.capacity < 1:
            raise ValueError("vehicles and capacity must be positive")
        if self.vehicles * self.capacity < self.n:
            raise ValueError("V·C < n: capacity cannot cover all nodes")
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def is_tsp(self) -> bool:
        return self.vehicles == 1 and self.capacity >= self.n

    def __eq__(self, other):
        if not isinstance(other, CvrpInstance):
            return NotImplemented
        same_coords = (self.coords is None and other.coords is None) or (
            self.coords is not None
            and other.coords is not None
            and np.array_equal(self.coords, other.coords)
        )
        return (
            self.name == other.name
            and self.n == other.n
            and self.vehicles == other.vehicles
            and self.capacity == other.capacity
            and np.array_equal(self.cost, other.cost)
            and same_coords
        )

    __hash__ = None

    def subinstance(self, nodes: Sequence[int], name: str | None = None) -> CvrpInstance:
        """Single-vehicle instance on ``nodes``; local node ``k`` is ``nodes[k-1]``."""
        idx = [0, *nodes]
        return CvrpInstance(
            name=name or f"{self.name}[{','.join(map(str, nodes))}]",
            n=len(nodes),
            cost=self.cost[np.ix_(idx, idx)],
            vehicles=1,
            capacity=len(nodes),
        )


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    cost: float

    def canonical(self) -> tuple[Route, ...]:
        return canonical_routes(self.routes)


def canonical_routes(routes: Sequence[Sequence[int]]) -> tuple[Route, ...]:
    """Vehicle-label-free form: nonempty routes sorted, empties padded at the end."""
    nonempty = sorted(tuple(r) for r in routes if len(r))
    return tuple(nonempty) + ((),) * (len(routes) - len(nonempty))


def euclidean_costs(coords) -> np.ndarray:
    pts = np.asarray(coords, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.round(np.sqrt((diff**2).sum(axis=-1)), 6)


def load_instance(document: str) -> CvrpInstance:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed instance document: {exc}") from None
    if not isinstance(data, dict):
        raise ValueError("malformed instance document: expected a JSON object")
    unknown = set(data) - _INSTANCE_FIELDS
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    for key in ("name", "n", "vehicles", "capacity"):
        if key not in data:
            raise ValueError(f"missing field {key!r}")
    if ("matrix" in data) == ("coords" in data):
        raise ValueError("exactly one of 'matrix' or 'coords' is required")
    if not isinstance(data["name"], str):
        raise ValueError("'name' must be a string")
    for key in ("n", "vehicles", "capacity"):
        if not isinstance(data[key], int) or isinstance(data[key], bool):
            raise ValueError(f"{key!r} must be an integer")
    n = data["n"]
    coords = None
    try:
        if "matrix" in data:
            cost = np.array(data["matrix"], dtype=float)
        else:
            coords = np.array(data["coords"], dtype=float)
            if coords.shape != (n + 1, 2):
                raise ValueError(f"dimension mismatch: coords shape {coords.shape}, expected {(n + 1, 2)}")
            cost = euclidean_costs(coords)
    except (TypeError, ValueError) as exc:
        if "dimension mismatch" in str(exc):
            raise
        raise ValueError(f"dimension mismatch or non-numeric entries: {exc}") from None
    if cost.ndim != 2:
        raise ValueError("dimension mismatch: matrix must be 2-D")
    return CvrpInstance(
        name=data["name"],
        n=n,
        cost=cost,
        vehicles=data["vehicles"],
        capacity=data["capacity"],
        coords=coords,
    )


def dump_instance(instance: CvrpInstance) -> str:
    doc = {
        "name": instance.name,
        "n": instance.n,
        "vehicles": instance.vehicles,
        "capacity": instance.capacity,
    }
    if instance.coords is not None:
        doc["coords"] = instance.coords.tolist()
    else:
        doc["matrix"] = instance.cost.tolist()
    return json.dumps(doc, indent=2) + "\n"


def route_cost(instance: CvrpInstance, route: Sequence[int]) -> float:
    route = tuple(route)
    if not route:
        return 0.0
    if len(set(route)) != len(route):
        raise ValueError(f"duplicate node in route {route}")
    for u in route:
        if not 1 <= u <= instance.n:
            raise ValueError(f"node index {u} out of range 1..{instance.n}")
    stops = (0, *route, 0)
    # fsum: correctly rounded, so mathematically tied routes compare equal
    return math.fsum(instance.cost[a, b] for a, b in zip(stops, stops[1:]))


def check_routes(instance: CvrpInstance, routes: Sequence[Sequence[int]]) -> tuple[Route, ...]:
    routes = tuple(tuple(int(u) for u in r) for r in routes)
    if len(routes) > instance.vehicles:
        raise ValueError(f"{len(routes)} routes for {instance.vehicles} vehicles")
    seen: set[int] = set()
    for r in routes:
        for u in r:
            if not 1 <= u <= instance.n:
                raise ValueError(f"node index {u} out of range 1..{instance.n}")
            if u in seen:
                raise ValueError(f"duplicated node {u}")
            seen.add(u)
    missing = set(range(1, instance.n + 1)) - seen
    if missing:
        raise ValueError(f"missing node(s) {sorted(missing)}")
    for r in routes:
        if len(r) > instance.capacity:
            raise ValueError(f"route {r} longer than capacity {instance.capacity}")
    return routes + ((),) * (instance.vehicles - len(routes))


def solution_cost(instance: CvrpInstance, routes) -> float:
    if isinstance(routes, Solution):
        routes = routes.routes
    routes = check_routes(instance, routes)
    return math.fsum(route_cost(instance, r) for r in routes)


def make_solution(instance: CvrpInstance, routes) -> Solution:
    routes = check_routes(instance, routes)
    return Solution(routes=routes, cost=solution_cost(instance, routes))


def cluster_nodes(instance: CvrpInstance) -> list[list[int]]:
    """Greedy capacitated farthest-first clustering on the cost matrix.

    Seeds are chosen one at a time as the unassigned node farthest from the
    depot and all previous seeds (min over that set). Remaining nodes, in
    ascending order, join the nearest seed whose cluster still has room.
    Ties go to the lower node / cluster index.
    """
    n, V, C = instance.n, instance.vehicles, instance.capacity
    if V * C < n:
        raise ValueError("V·C < n: capacity cannot cover all nodes")
    W = instance.cost
    seeds: list[int] = []
    for _ in range(min(V, n)):
        anchors = [0, *seeds]
        best, best_d = None, -1.0
        for u in range(1, n + 1):
            if u in seeds:
                continue
            d = min(W[a, u] for a in anchors)
            if d > best_d:
                best, best_d = u, d
        seeds.append(best)
    clusters = [[s] for s in seeds]
    for u in range(1, n + 1):
        if u in seeds:
            continue
        open_ = [k for k, c in enumerate(clusters) if len(c) < C]
        k = min(open_, key=lambda k: (W[seeds[k], u], k))
        clusters[k].append(u)
    return [sorted(c) for c in clusters]


def generate_instance(seed: int, n: int, vehicles: int = 1, capacity: int | None = None,
                      box: float = 10.0, name: str | None = None) -> CvrpInstance:
    if n < 1:
        raise ValueError("n must be at least 1")
    capacity = n if capacity is None else capacity
    if vehicles * capacity < n:
        raise ValueError("V·C < n: capacity cannot cover all nodes")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(0.0, box, size=(n + 1, 2))
    return CvrpInstance(
        name=name or f"gen-s{seed}-n{n}-v{vehicles}-c{capacity}",
        n=n,
        cost=euclidean_costs(coords),
        vehicles=vehicles,
        capacity=capacity,
        coords=coords,
    )
