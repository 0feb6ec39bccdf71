import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qroute import engine
from qroute.encoding import BinaryLayout, Shape
from qroute.errors import GuardError
from qroute.qubo import build_binary_cost

X = np.array([[0, 1], [1, 0]], dtype=complex)


def dense_x_mixer(q, beta):
    u = np.array([[1.0]])
    for _ in range(q):
        u = np.kron(expm(-1j * beta * X), u)
    return u


def dense_swap(layout, k, l):
    m, dim = layout.register_width, 1 << layout.num_qubits
    S = np.zeros((dim, dim))
    for x in range(dim):
        regs = layout.registers(x)
        regs[k], regs[l] = regs[l], regs[k]
        S[layout.from_registers(regs), x] = 1
    return S


def random_state(q, rng):
    v = rng.normal(size=1 << q) + 1j * rng.normal(size=1 << q)
    return v / np.linalg.norm(v)


def test_init_basis():
    assert np.array_equal(engine.init_basis(2, 0), [1, 0, 0, 0])
    assert np.array_equal(engine.init_basis(2, 3), [0, 0, 0, 1])
    with pytest.raises(ValueError):
        engine.init_basis(1, 2)


def test_init_plus():
    assert np.allclose(engine.init_plus(1), [2**-0.5] * 2, atol=0, rtol=1e-15)
    assert np.array_equal(engine.init_plus(2), [0.5] * 4)
    assert abs(np.linalg.norm(engine.init_plus(9)) - 1) < 1e-14


def test_ceiling_is_a_guard():
    with pytest.raises(GuardError):
        engine.init_plus(engine.MAX_QUBITS + 1)


def test_init_feasible_uniform():
    two = BinaryLayout(Shape.tsp(2))
    sv = engine.init_feasible_uniform(two)
    assert np.allclose(sv, [0, 2**-0.5, 2**-0.5, 0], atol=1e-15)
    three = BinaryLayout(Shape.tsp(3))
    sv = engine.init_feasible_uniform(three)
    assert np.count_nonzero(sv) == 6 and np.allclose(sv[sv != 0], 6**-0.5)
    assert engine.leakage(sv, three) == 0.0


def test_phase_examples(tsp2):
    layout = BinaryLayout(Shape.tsp(2))
    cost = build_binary_cost(tsp2, layout)
    sv = engine.init_feasible_uniform(layout)
    assert np.array_equal(engine.apply_phase(sv, cost, 0.0), sv)
    out = engine.apply_phase(sv, cost, np.pi / 6)
    assert np.allclose(engine.probabilities(out), engine.probabilities(sv), atol=1e-15)
    rel = out[1] / out[2]  # costs 9 and 3
    assert np.isclose(rel, np.exp(-1j * np.pi * (9 - 3) / 6), atol=1e-12)
    const = engine.apply_phase(sv, np.full(4, 7.0), 1.3)
    assert np.allclose(engine.probabilities(const), engine.probabilities(sv), atol=1e-15)


def test_x_mixer_examples():
    e0 = engine.init_basis(1, 0)
    assert np.array_equal(engine.apply_x_mixer(e0, 0.0), e0)
    assert np.allclose(engine.apply_x_mixer(e0, np.pi / 2), [0, -1j], atol=1e-15)
    assert np.allclose(engine.apply_x_mixer(e0, np.pi / 4), [np.cos(np.pi / 4), -1j * np.sin(np.pi / 4)])


@pytest.mark.parametrize("q", [1, 2, 3, 5])
def test_x_mixer_matches_dense(q):
    rng = np.random.default_rng(q)
    sv = random_state(q, rng)
    beta = rng.uniform(0, 2 * np.pi)
    assert np.allclose(engine.apply_x_mixer(sv, beta), dense_x_mixer(q, beta) @ sv, atol=1e-12)


def test_partial_swap_examples():
    layout = BinaryLayout(Shape.tsp(2))
    sv = engine.init_basis(2, 1)
    assert np.array_equal(engine.apply_partial_swap(sv, layout, (0, 1), 0.0), sv)
    out = engine.apply_partial_swap(sv, layout, (0, 1), np.pi / 2)
    assert np.allclose(out, [0, 0, -1j, 0], atol=1e-15)
    out = engine.apply_partial_swap(sv, layout, (0, 1), np.pi / 4)
    assert np.allclose(np.abs(out[[1, 2]]), 2**-0.5) and out[0] == out[3] == 0


@pytest.mark.parametrize("n, pair", [(3, (0, 2)), (4, (1, 2)), (4, (3, 0))])
def test_partial_swap_matches_dense(n, pair):
    layout = BinaryLayout(Shape.tsp(n))
    rng = np.random.default_rng(n)
    sv = random_state(layout.num_qubits, rng)
    theta = rng.uniform(-3, 3)
    dense = expm(-1j * theta * dense_swap(layout, *pair))
    assert np.allclose(engine.apply_partial_swap(sv, layout, pair, theta), dense @ sv, atol=1e-12)


def test_partial_swap_rejects_bad_pairs():
    layout = BinaryLayout(Shape.tsp(3))
    sv = engine.init_feasible_uniform(layout)
    for pair in [(1, 1), (0, 3)]:
        with pytest.raises(ValueError):
            engine.apply_partial_swap(sv, layout, pair, 0.1)


def test_hard_mixer_examples():
    two = BinaryLayout(Shape.tsp(2))
    sv = engine.init_basis(2, 1)
    assert engine.odd_even_schedule(2) == [(0, 1)]
    assert np.array_equal(
        engine.apply_hard_mixer(sv, two, 0.7), engine.apply_partial_swap(sv, two, (0, 1), 0.7)
    )
    assert engine.odd_even_schedule(5) == [(0, 1), (2, 3), (1, 2), (3, 4)]
    three = BinaryLayout(Shape.tsp(3))
    start = engine.init_basis(three.num_qubits, three.encode((2, 3, 1)))
    assert np.array_equal(engine.apply_hard_mixer(start, three, 0.0), start)
    for theta in np.linspace(-3, 3, 13):
        assert engine.leakage(engine.apply_hard_mixer(start, three, theta), three) <= 1e-12
    with pytest.raises(ValueError):
        engine.apply_hard_mixer(engine.init_basis(1, 0), BinaryLayout(Shape.tsp(1)), 0.3)


def test_expectation_examples(tsp2):
    layout = BinaryLayout(Shape.tsp(2))
    cost = build_binary_cost(tsp2, layout)
    assert engine.expectation(engine.init_basis(2, 1), cost) == 9
    sv = engine.init_feasible_uniform(layout)
    assert np.isclose(engine.expectation(sv, cost), 6, rtol=1e-15)
    for gamma in (0.3, 1.1, -2.0):
        assert np.isclose(engine.expectation(engine.apply_phase(sv, cost, gamma), cost), 6, rtol=1e-14)


def test_sample_examples():
    assert engine.sample(engine.init_basis(3, 5), 50, seed=1) == {5: 50}
    sv = engine.init_plus(2)
    assert engine.sample(sv, 1000, seed=5) == engine.sample(sv, 1000, seed=5)
    shots = 100_000
    counts = engine.sample(sv, shots, seed=11)
    sigma = np.sqrt(shots * 0.25 * 0.75)
    assert all(abs(counts[i] - shots / 4) < 5 * sigma for i in range(4))


def test_leakage_examples():
    layout = BinaryLayout(Shape.tsp(2))
    assert engine.leakage(engine.init_feasible_uniform(layout), layout) == 0
    assert np.isclose(engine.leakage(engine.init_plus(2), layout), 0.5, rtol=1e-15)


def test_dump_state():
    layout = BinaryLayout(Shape.tsp(2))
    text = engine.dump_state(engine.apply_partial_swap(engine.init_basis(2, 1), layout, (0, 1), np.pi / 4))
    rows = [line.split() for line in text.splitlines()]
    assert [int(r[0]) for r in rows] == [1, 2]
    assert np.isclose(float(rows[1][2]), -np.sin(np.pi / 4))


def _random_sequence(rng, layout, cost, sv, steps):
    for _ in range(steps):
        op = rng.integers(3)
        if op == 0:
            sv = engine.apply_phase(sv, cost, rng.uniform(-np.pi, np.pi))
        elif op == 1:
            sv = engine.apply_hard_mixer(sv, layout, rng.uniform(-np.pi, np.pi))
        else:
            k, l = rng.choice(layout.num_registers, size=2, replace=False)
            sv = engine.apply_partial_swap(sv, layout, (int(k), int(l)), rng.uniform(-np.pi, np.pi))
    return sv


@pytest.mark.parametrize("n", [2, 3, 4])
def test_subspace_preserved_from_feasible_starts(n):
    from qroute.model import generate_instance

    layout = BinaryLayout(Shape.tsp(n))
    cost = build_binary_cost(generate_instance(n, n), layout)
    rng = np.random.default_rng(100 + n)
    for trial in range(10):
        start = int(rng.choice(layout.feasible_indices))
        sv = _random_sequence(rng, layout, cost, engine.init_basis(layout.num_qubits, start), 20)
        assert engine.leakage(sv, layout) <= 1e-12
        assert abs(np.linalg.norm(sv) - 1) <= 1e-10


def test_unitarity_over_long_sequences():
    rng = np.random.default_rng(0)
    layout = BinaryLayout(Shape.tsp(4))  # 8 qubits
    cost = rng.uniform(0, 20, size=1 << layout.num_qubits)
    sv = random_state(layout.num_qubits, rng)
    for _ in range(100):
        if rng.integers(2):
            sv = engine.apply_x_mixer(sv, rng.uniform(-np.pi, np.pi))
        sv = _random_sequence(rng, layout, cost, sv, 1)
    assert abs(np.linalg.norm(sv) - 1) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(theta=st.floats(-10, 10), seed=st.integers(0, 1000), n=st.integers(2, 4))
def test_partial_swap_inverse(theta, seed, n):
    layout = BinaryLayout(Shape.tsp(n))
    sv = random_state(layout.num_qubits, np.random.default_rng(seed))
    back = engine.apply_partial_swap(engine.apply_partial_swap(sv, layout, (0, 1), theta), layout, (0, 1), -theta)
    assert np.allclose(back, sv, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(gamma=st.floats(-10, 10), seed=st.integers(0, 1000))
def test_phase_commutes_with_probabilities_and_leakage(gamma, seed):
    layout = BinaryLayout(Shape.tsp(3))
    rng = np.random.default_rng(seed)
    sv = random_state(layout.num_qubits, rng)
    cost = rng.uniform(0, 10, size=sv.size)
    out = engine.apply_phase(sv, cost, gamma)
    assert np.allclose(engine.probabilities(out), engine.probabilities(sv), atol=1e-14)
    assert np.isclose(engine.leakage(out, layout), engine.leakage(sv, layout), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(-10, 10), q=st.integers(1, 8))
def test_x_mixer_on_plus_is_global_phase(beta, q):
    out = engine.apply_x_mixer(engine.init_plus(q), beta)
    assert np.allclose(out, np.exp(-1j * beta * q) * engine.init_plus(q), atol=1e-12)
