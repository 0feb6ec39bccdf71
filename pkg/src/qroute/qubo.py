"""Cost models over bitstrings: penalised one-hot QUBOs and the diagonal binary cost."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .encoding import BinaryLayout, Layout, OneHotLayout, Shape, enumerate_feasible
from .model import CvrpInstance, solution_cost


def penalty_weight(instance: CvrpInstance) -> float:
    """A = n * (1 + max cost). Any single constraint violation outweighs routing gains."""
    return instance.n * (1.0 + float(instance.cost.max(initial=0.0)))


@dataclass(frozen=True, eq=False)
class QuboModel:
    num_bits: int
    offset: float = 0.0
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for i, j in self.quadratic:
            if not i < j:
                raise ValueError(f"quadratic key {(i, j)} must satisfy i < j")

    @property
    def num_qubits(self) -> int:
        return self.num_bits

    def value(self, bits) -> float:
        x = int(bits)
        on = lambda i: (x >> i) & 1  # noqa: E731
        terms = [self.offset]
        terms += [c for i, c in self.linear.items() if on(i)]
        terms += [c for (i, j), c in self.quadratic.items() if on(i) and on(j)]
        return math.fsum(terms)

    @cached_property
    def _values(self) -> np.ndarray:
        idx = np.arange(1 << self.num_bits, dtype=np.int64)
        bits = [((idx >> i) & 1).astype(bool) for i in range(self.num_bits)]
        out = np.full(idx.shape, self.offset, dtype=float)
        for i, c in sorted(self.linear.items()):
            out[bits[i]] += c
        for (i, j), c in sorted(self.quadratic.items()):
            out[bits[i] & bits[j]] += c
        out.setflags(write=False)
        return out

    def values(self) -> np.ndarray:
        """Value on every basis index, as a read-only array of length 2^q."""
        return self._values

    def to_text(self) -> str:
        lines = [f"offset {self.offset:.12g}"]
        lines += [f"lin {i} {c:.12g}" for i, c in sorted(self.linear.items())]
        lines += [f"quad {i} {j} {c:.12g}" for (i, j), c in sorted(self.quadratic.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, num_bits: int) -> QuboModel:
        offset, lin, quad = 0.0, {}, {}
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "offset":
                offset = float(parts[1])
            elif parts[0] == "lin":
                lin[int(parts[1])] = float(parts[2])
            elif parts[0] == "quad":
                quad[int(parts[1]), int(parts[2])] = float(parts[3])
            else:
                raise ValueError(f"bad QUBO line {line!r}")
        return cls(num_bits, offset, lin, quad)


class _Builder:
    def __init__(self, num_bits: int):
        self.num_bits = num_bits
        self.offset = 0.0
        self.linear: dict[int, float] = defaultdict(float)
        self.quadratic: dict[tuple[int, int], float] = defaultdict(float)

    def add(self, i: int, c: float):
        self.linear[i] += c

    def add_pair(self, i: int, j: int, c: float):
        if i == j:
            self.linear[i] += c
        else:
            self.quadratic[min(i, j), max(i, j)] += c

    def add_square(self, bits: list[int], const: float, weight: float):
        """weight * (sum(bits) + const)^2 with x^2 = x."""
        for i in bits:
            self.linear[i] += weight * (1.0 + 2.0 * const)
        for a in range(len(bits)):
            for b in range(a + 1, len(bits)):
                self.add_pair(bits[a], bits[b], 2.0 * weight)
        self.offset += weight * const * const

    def build(self) -> QuboModel:
        lin = {i: c for i, c in self.linear.items() if c != 0.0}
        quad = {k: c for k, c in self.quadratic.items() if c != 0.0}
        return QuboModel(self.num_bits, self.offset, dict(sorted(lin.items())), dict(sorted(quad.items())))


def build_tsp_onehot(instance: CvrpInstance, A: float | None = None) -> QuboModel:
    if instance.vehicles != 1:
        raise ValueError("build_tsp_onehot needs V = 1")
    A = penalty_weight(instance) if A is None else A
    n, W = instance.n, instance.cost
    layout = OneHotLayout(Shape.tsp(n))
    x = layout.bit
    b = _Builder(layout.num_qubits)
    for j in range(1, n):
        for u in range(1, n + 1):
            for v in range(1, n + 1):
                if u != v:
                    b.add_pair(x(u, j), x(v, j + 1), W[u, v])
    for u in range(1, n + 1):
        b.add(x(u, 1), W[0, u])
        b.add(x(u, n), W[u, 0])
    for u in range(1, n + 1):
        b.add_square([x(u, j) for j in range(1, n + 1)], -1.0, A)
    for j in range(1, n + 1):
        b.add_square([x(u, j) for u in range(1, n + 1)], -1.0, A)
    return b.build()


EXCLUSIVITY_FACTOR = 4.0


def build_cvrp_onehot(instance: CvrpInstance, A: float | None = None) -> QuboModel:
    """One-hot CVRP model over x[u, j, v].

    Besides node coverage and slot exclusivity, occupied slots of a vehicle
    must form a prefix (no occupied slot after an empty one). With that, the
    first empty slot closes the route through the depot row of the cost
    matrix and trailing empty slots cost nothing, so every feasible string is
    priced at its true route cost. The slot-exclusivity weight is scaled so
    that the contiguity term cannot cancel it on over-full slots.
    """
    A = penalty_weight(instance) if A is None else A
    n, C, V, W = instance.n, instance.capacity, instance.vehicles, instance.cost
    layout = OneHotLayout(Shape.cvrp(n, C, V))
    x = layout.bit
    b = _Builder(layout.num_qubits)
    nodes = range(1, n + 1)
    for v in range(1, V + 1):
        for u in nodes:
            b.add(x(u, 1, v), W[0, u])
            b.add(x(u, C, v), W[u, 0])
        for j in range(1, C):
            for u in nodes:
                # leaving u at slot j: to w if slot j+1 holds w, else back to depot
                b.add(x(u, j, v), W[u, 0])
                for w in nodes:
                    b.add_pair(x(u, j, v), x(w, j + 1, v), (W[u, w] if u != w else 0.0) - W[u, 0])
        for j in range(1, C + 1):
            slot = [x(u, j, v) for u in nodes]
            for a in range(n):
                for c in range(a + 1, n):
                    b.add_pair(slot[a], slot[c], EXCLUSIVITY_FACTOR * A)
        for j in range(1, C):
            # A * [slot j+1 occupied] * [slot j empty]
            for w in nodes:
                b.add(x(w, j + 1, v), A)
                for u in nodes:
                    b.add_pair(x(u, j, v), x(w, j + 1, v), -A)
    for u in nodes:
        b.add_square([x(u, j, v) for v in range(1, V + 1) for j in range(1, C + 1)], -1.0, A)
    return b.build()


def build_onehot(instance: CvrpInstance, A: float | None = None) -> QuboModel:
    if instance.is_tsp:
        return build_tsp_onehot(instance, A)
    return build_cvrp_onehot(instance, A)


@dataclass(frozen=True, eq=False)
class DiagonalCost:
    """Routing cost on feasible basis states, ``infeasible_value`` elsewhere."""

    layout: BinaryLayout
    table: np.ndarray
    infeasible_value: float

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def value(self, bits) -> float:
        return float(self.table[self.layout.check_width(bits)])

    def values(self) -> np.ndarray:
        return self.table


def build_binary_cost(instance: CvrpInstance, layout: BinaryLayout | None = None,
                      infeasible_value: float | None = None) -> DiagonalCost:
    shape = Shape.of(instance)
    layout = BinaryLayout(shape) if layout is None else layout
    if layout.shape != shape:
        raise ValueError(f"layout shape {layout.shape} does not match instance shape {shape}")
    P = penalty_weight(instance) if infeasible_value is None else infeasible_value
    table = np.full(1 << layout.num_qubits, P, dtype=float)
    for idx in enumerate_feasible(layout):
        table[idx] = solution_cost(instance, layout.decode(idx).routes)
    table.setflags(write=False)
    return DiagonalCost(layout, table, P)


def build_cost(instance: CvrpInstance, layout: Layout, A: float | None = None):
    if isinstance(layout, BinaryLayout):
        return build_binary_cost(instance, layout, A)
    return build_onehot(instance, A)
