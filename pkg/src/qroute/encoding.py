"""Qubit layouts for routing problems and the maps between solutions and bitstrings.

Two layouts are supported for both TSP and CVRP shapes:

* one-hot: one bit per (node, position[, vehicle]) assignment;
* binary: integer registers. For TSP, register ``k`` holds the visit position of
  node ``k+1``; for CVRP there is one register per (vehicle, slot) holding the
  node index in that slot, with 0 meaning empty.

Register ``k`` of width ``m`` occupies bits ``k*m .. k*m+m-1`` of the basis
index, little-endian.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import GuardError
from .model import CvrpInstance, Route

MAX_FEASIBLE = 10**6
MAX_EXACT_N = 20


def ceil_log2(k: int) -> int:
    """Register width for ``k`` distinct values; at least one bit."""
    return max(1, (k - 1).bit_length())


@dataclass(frozen=True)
class Shape:
    n: int
    capacity: int | None = None
    vehicles: int | None = None

    @property
    def is_tsp(self) -> bool:
        return self.capacity is None

    @classmethod
    def tsp(cls, n: int) -> Shape:
        return cls(n)

    @classmethod
    def cvrp(cls, n: int, capacity: int, vehicles: int) -> Shape:
        return cls(n, capacity, vehicles)

    @classmethod
    def of(cls, instance: CvrpInstance) -> Shape:
        if instance.is_tsp:
            return cls.tsp(instance.n)
        return cls.cvrp(instance.n, instance.capacity, instance.vehicles)


@dataclass
class Decoded:
    routes: tuple[Route, ...] | None
    violations: list[str]

    @property
    def feasible(self) -> bool:
        return self.routes is not None


@dataclass(frozen=True)
class _Layout:
    shape: Shape

    kind = ""

    @property
    def n(self) -> int:
        return self.shape.n

    def _routes_arg(self, routes) -> tuple[Route, ...]:
        routes = tuple(routes)
        if self.shape.is_tsp and (not routes or isinstance(routes[0], (int, np.integer))):
            routes = (routes,)
        routes = tuple(tuple(int(u) for u in r) for r in routes)
        n_vehicles = 1 if self.shape.is_tsp else self.shape.vehicles
        cap = self.n if self.shape.is_tsp else self.shape.capacity
        routes = routes + ((),) * (n_vehicles - len(routes))
        nodes = sorted(u for r in routes for u in r)
        if len(routes) != n_vehicles or nodes != list(range(1, self.n + 1)):
            raise ValueError(f"solution {routes} does not match shape {self.shape}")
        if any(len(r) > cap for r in routes):
            raise ValueError(f"solution {routes} exceeds capacity {cap}")
        if self.shape.is_tsp and len(routes[0]) != self.n:
            raise ValueError(f"TSP route {routes[0]} must visit all {self.n} nodes")
        return routes

    def check_width(self, bits) -> int:
        x = int(bits)
        if not 0 <= x < (1 << self.num_qubits):
            raise ValueError(f"bitstring {x} does not fit width {self.num_qubits}")
        return x

    @cached_property
    def feasible_indices(self) -> np.ndarray:
        return np.array(enumerate_feasible(self), dtype=np.int64)

    @cached_property
    def feasible_mask(self) -> np.ndarray:
        mask = np.zeros(1 << self.num_qubits, dtype=bool)
        mask[self.feasible_indices] = True
        return mask


@dataclass(frozen=True)
class OneHotLayout(_Layout):
    kind = "onehot"

    @property
    def positions(self) -> int:
        return self.n if self.shape.is_tsp else self.shape.capacity

    @property
    def num_vehicles(self) -> int:
        return 1 if self.shape.is_tsp else self.shape.vehicles

    @property
    def num_qubits(self) -> int:
        return self.n * self.positions * self.num_vehicles

    def bit(self, u: int, j: int, v: int = 1) -> int:
        """Bit position of x[u, j(, v)], all indices 1-based."""
        n = self.n
        if self.shape.is_tsp:
            return (u - 1) * n + (j - 1)
        return ((v - 1) * self.shape.capacity + (j - 1)) * n + (u - 1)

    def encode(self, routes) -> int:
        routes = self._routes_arg(routes)
        x = 0
        for v, r in enumerate(routes, start=1):
            for j, u in enumerate(r, start=1):
                x |= 1 << self.bit(u, j, v)
        return x

    def decode(self, bits) -> Decoded:
        x = self.check_width(bits)
        n, P, V = self.n, self.positions, self.num_vehicles
        on = lambda u, j, v: (x >> self.bit(u, j, v)) & 1  # noqa: E731
        violations = []
        for u in range(1, n + 1):
            s = sum(on(u, j, v) for j in range(1, P + 1) for v in range(1, V + 1))
            if s != 1:
                violations.append(f"row u={u} sum {s}")
        for v in range(1, V + 1):
            empty_seen = False
            for j in range(1, P + 1):
                s = sum(on(u, j, v) for u in range(1, n + 1))
                if self.shape.is_tsp:
                    if s != 1:
                        violations.append(f"column j={j} sum {s}")
                    continue
                if s > 1:
                    violations.append(f"slot (v={v}, j={j}) holds {s} nodes")
                if s == 0:
                    empty_seen = True
                elif empty_seen:
                    violations.append(f"slot (v={v}, j={j}) follows an empty slot")
        if violations:
            return Decoded(None, violations)
        routes = []
        for v in range(1, V + 1):
            r = []
            for j in range(1, P + 1):
                r.extend(u for u in range(1, n + 1) if on(u, j, v))
            routes.append(tuple(r))
        return Decoded(tuple(routes), [])


@dataclass(frozen=True)
class BinaryLayout(_Layout):
    """Compact register layout.

    ``slot_width`` chooses the CVRP register width: ``"marker"`` reserves
    value 0 for an empty slot (width ceil(log2(n+1))); ``"paper"`` uses
    ceil(log2 n) and is only meaningful for resource counting.
    """

    slot_width: str = "marker"
    kind = "binary"

    @property
    def num_registers(self) -> int:
        if self.shape.is_tsp:
            return self.n
        return self.shape.capacity * self.shape.vehicles

    @property
    def register_width(self) -> int:
        if self.shape.is_tsp or self.slot_width == "paper":
            return ceil_log2(self.n)
        return ceil_log2(self.n + 1)

    @property
    def num_qubits(self) -> int:
        return self.num_registers * self.register_width

    def registers(self, bits) -> list[int]:
        x = self.check_width(bits)
        m = self.register_width
        mask = (1 << m) - 1
        return [(x >> (k * m)) & mask for k in range(self.num_registers)]

    def from_registers(self, values: Sequence[int]) -> int:
        m = self.register_width
        return sum(int(val) << (k * m) for k, val in enumerate(values))

    def encode(self, routes) -> int:
        routes = self._routes_arg(routes)
        if self.shape.is_tsp:
            pos = [0] * self.n
            for i, u in enumerate(routes[0]):
                pos[u - 1] = i
            return self.from_registers(pos)
        if self.slot_width != "marker":
            raise ValueError("paper slot width has no empty marker and cannot encode CVRP solutions")
        C = self.shape.capacity
        slots = [0] * self.num_registers
        for v, r in enumerate(routes):
            for j, u in enumerate(r):
                slots[v * C + j] = u
        return self.from_registers(slots)

    def decode(self, bits) -> Decoded:
        regs = self.registers(bits)
        n = self.n
        violations = []
        if self.shape.is_tsp:
            seen = {}
            for k, p in enumerate(regs):
                if p >= n:
                    violations.append(f"node {k + 1}: position {p} out of range")
                elif p in seen:
                    violations.append(f"duplicated position {p} (nodes {seen[p]} and {k + 1})")
                else:
                    seen[p] = k + 1
            if violations:
                return Decoded(None, violations)
            return Decoded((tuple(seen[p] for p in range(n)),), [])
        counts = [0] * (n + 1)
        for k, u in enumerate(regs):
            if u > n:
                violations.append(f"slot {k}: node {u} out of range")
            else:
                counts[u] += 1
        for u in range(1, n + 1):
            if counts[u] == 0:
                violations.append(f"node {u} missing")
            elif counts[u] > 1:
                violations.append(f"node {u} duplicated ({counts[u]} slots)")
        if violations:
            return Decoded(None, violations)
        C = self.shape.capacity
        routes = tuple(
            tuple(u for u in regs[v * C:(v + 1) * C] if u) for v in range(self.shape.vehicles)
        )
        return Decoded(routes, [])


Layout = OneHotLayout | BinaryLayout


def make_layout(kind: str, shape: Shape | CvrpInstance, **kw) -> Layout:
    if isinstance(shape, CvrpInstance):
        shape = Shape.of(shape)
    if kind == "onehot":
        return OneHotLayout(shape)
    if kind == "binary":
        return BinaryLayout(shape, **kw)
    raise ValueError(f"unknown encoding kind {kind!r}")


def encode(layout: Layout, solution) -> int:
    if hasattr(solution, "routes"):
        solution = solution.routes
    return layout.encode(solution)


def decode(layout: Layout, bits) -> Decoded:
    return layout.decode(bits)


def qubit_count(kind: str, shape: Shape, slot_width: str = "marker") -> int:
    """Qubits needed by an encoding; ``slot_width="paper"`` drops the empty marker."""
    if kind == "binary":
        return BinaryLayout(shape, slot_width=slot_width).num_qubits
    return make_layout(kind, shape).num_qubits


def feasible_count(kind: str, shape: Shape) -> int:
    n = shape.n
    if shape.is_tsp:
        return math.factorial(n)
    C, V = shape.capacity, shape.vehicles
    if kind == "binary":
        # each node picks a distinct slot, the rest hold the empty marker
        return math.perm(C * V, n)
    # labelled vehicles, contiguous routes: n! orderings times length compositions
    compositions = sum(
        1 for lens in itertools.product(range(C + 1), repeat=V) if sum(lens) == n
    )
    return math.factorial(n) * compositions


def feasible_fraction(kind: str, shape: Shape) -> Fraction:
    if shape.n > MAX_EXACT_N:
        raise GuardError(f"exact feasible fraction refused for n={shape.n} > {MAX_EXACT_N}")
    return Fraction(feasible_count(kind, shape), 2 ** qubit_count(kind, shape))


def _labelled_solutions(shape: Shape):
    n = shape.n
    if shape.is_tsp:
        for perm in itertools.permutations(range(1, n + 1)):
            yield (perm,)
        return
    C, V = shape.capacity, shape.vehicles
    for lens in itertools.product(range(C + 1), repeat=V):
        if sum(lens) != n:
            continue
        for perm in itertools.permutations(range(1, n + 1)):
            routes, i = [], 0
            for ell in lens:
                routes.append(perm[i:i + ell])
                i += ell
            yield tuple(routes)


def enumerate_feasible(layout: Layout) -> list[int]:
    """Sorted basis indices of every feasible state of ``layout``."""
    shape = layout.shape
    kind = layout.kind
    count = feasible_count(kind, shape)
    if count > MAX_FEASIBLE:
        raise GuardError(f"feasible set of {count} states exceeds {MAX_FEASIBLE}")
    if kind == "binary" and not shape.is_tsp:
        n, R = shape.n, layout.num_registers
        out = []
        for slots in itertools.permutations(range(R), n):
            regs = [0] * R
            for u, s in enumerate(slots, start=1):
                regs[s] = u
            out.append(layout.from_registers(regs))
        return sorted(out)
    return sorted(layout.encode(routes) for routes in _labelled_solutions(shape))
