"""Exact statevector kernel.

States are plain complex128 numpy arrays of length 2^q, qubit ``k`` being bit
``k`` of the basis index. Every operation returns a new array and works
matrix-free on amplitude pairs, so each costs O(2^q).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .encoding import BinaryLayout, Layout
from .errors import GuardError

MAX_QUBITS = 26


def num_qubits(sv: np.ndarray) -> int:
    q = int(sv.shape[0]).bit_length() - 1
    if sv.ndim != 1 or 1 << q != sv.shape[0]:
        raise ValueError(f"state length {sv.shape} is not a power of two")
    return q


def _check_ceiling(q: int, ceiling: int | None = None):
    ceiling = MAX_QUBITS if ceiling is None else ceiling
    if q > ceiling:
        raise GuardError(f"{q} qubits exceeds the statevector ceiling of {ceiling}")


def init_basis(q: int, index: int) -> np.ndarray:
    _check_ceiling(q)
    if not 0 <= index < 1 << q:
        raise ValueError(f"basis index {index} out of range for {q} qubits")
    sv = np.zeros(1 << q, dtype=complex)
    sv[index] = 1.0
    return sv


def init_plus(q: int) -> np.ndarray:
    if q < 1:
        raise ValueError("init_plus needs at least one qubit")
    _check_ceiling(q)
    return np.full(1 << q, 2.0 ** (-q / 2), dtype=complex)


def init_feasible_uniform(layout: Layout) -> np.ndarray:
    _check_ceiling(layout.num_qubits)
    feas = layout.feasible_indices
    sv = np.zeros(1 << layout.num_qubits, dtype=complex)
    sv[feas] = 1.0 / np.sqrt(len(feas))
    return sv


def _cost_table(cost, q: int) -> np.ndarray:
    table = cost.values() if hasattr(cost, "values") else np.asarray(cost, dtype=float)
    if table.shape != (1 << q,):
        raise ValueError(f"cost covers {table.shape[0]} states, state has {1 << q}")
    return table


def apply_phase(sv: np.ndarray, cost, gamma: float) -> np.ndarray:
    """a_x <- a_x * exp(-i gamma c(x))."""
    table = _cost_table(cost, num_qubits(sv))
    return sv * np.exp(-1j * gamma * table)


def apply_x_mixer(sv: np.ndarray, beta: float) -> np.ndarray:
    """exp(-i beta X) on every qubit."""
    q = num_qubits(sv)
    c, s = np.cos(beta), -1j * np.sin(beta)
    out = sv.copy()
    for k in range(q):
        view = out.reshape(-1, 2, 1 << k)
        a0, a1 = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = c * a0 + s * a1
        view[:, 1, :] = c * a1 + s * a0
    return out


@lru_cache(maxsize=256)
def swap_permutation(num_qubits: int, width: int, k: int, l: int) -> np.ndarray:
    """Basis-index map exchanging registers k and l (each ``width`` bits)."""
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    mask = (1 << width) - 1
    rk = (idx >> (k * width)) & mask
    rl = (idx >> (l * width)) & mask
    cleared = idx & ~((mask << (k * width)) | (mask << (l * width)))
    perm = cleared | (rk << (l * width)) | (rl << (k * width))
    perm.setflags(write=False)
    return perm


def apply_partial_swap(sv: np.ndarray, layout: BinaryLayout, pair: tuple[int, int],
                       theta: float) -> np.ndarray:
    """exp(-i theta S_kl), S_kl the full exchange of registers k and l.

    S is a permutation with S^2 = 1, so the exponential is cos(theta) - i sin(theta) S.
    """
    k, l = pair
    R = layout.num_registers
    if k == l or not (0 <= k < R and 0 <= l < R):
        raise ValueError(f"register pair {pair} invalid for {R} registers")
    q = num_qubits(sv)
    if q != layout.num_qubits:
        raise ValueError(f"state has {q} qubits, layout has {layout.num_qubits}")
    perm = swap_permutation(q, layout.register_width, k, l)
    return np.cos(theta) * sv - 1j * np.sin(theta) * sv[perm]


def odd_even_schedule(num_registers: int) -> list[tuple[int, int]]:
    """One transposition layer: pairs (0,1),(2,3),... then (1,2),(3,4),..."""
    even = [(k, k + 1) for k in range(0, num_registers - 1, 2)]
    odd = [(k, k + 1) for k in range(1, num_registers - 1, 2)]
    return even + odd


def apply_hard_mixer(sv: np.ndarray, layout: BinaryLayout, theta: float,
                     schedule: list[tuple[int, int]] | None = None) -> np.ndarray:
    if layout.num_registers < 2:
        raise ValueError("hard mixer needs at least two registers")
    schedule = odd_even_schedule(layout.num_registers) if schedule is None else schedule
    for pair in schedule:
        sv = apply_partial_swap(sv, layout, pair, theta)
    return sv


def probabilities(sv: np.ndarray) -> np.ndarray:
    return sv.real**2 + sv.imag**2


def expectation(sv: np.ndarray, cost) -> float:
    table = _cost_table(cost, num_qubits(sv))
    return float(np.dot(probabilities(sv), table))


def sample(sv: np.ndarray, shots: int, seed: int | None = None) -> Counter:
    if shots < 1:
        raise ValueError("shots must be positive")
    p = probabilities(sv)
    p = p / p.sum()
    counts = np.random.default_rng(seed).multinomial(shots, p)
    return Counter({int(i): int(counts[i]) for i in np.flatnonzero(counts)})


def leakage(sv: np.ndarray, layout: Layout) -> float:
    return float(probabilities(sv)[~layout.feasible_mask].sum())


def dump_state(sv: np.ndarray) -> str:
    p = probabilities(sv)
    lines = [f"{i} {sv[i].real:.12g} {sv[i].imag:.12g}" for i in np.flatnonzero(p > 1e-12)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StateSummary:
    num_qubits: int
    norm: float
    top: tuple[tuple[int, float], ...]

    @classmethod
    def of(cls, sv: np.ndarray, k: int = 8) -> StateSummary:
        p = probabilities(sv)
        order = np.lexsort((np.arange(p.size), -p))[:k]
        return cls(num_qubits(sv), float(p.sum()), tuple((int(i), float(p[i])) for i in order))
