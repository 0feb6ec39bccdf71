import numpy as np
import pytest

from qroute.model import CvrpInstance

TSP2_MATRIX = [[0, 1, 4], [2, 0, 1], [1, 3, 0]]
TSP3_MATRIX = [[0, 5, 9, 4], [5, 0, 3, 8], [9, 3, 0, 2], [4, 8, 2, 0]]

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def tsp2():
    return CvrpInstance("tsp2", 2, TSP2_MATRIX, vehicles=1, capacity=2)


@pytest.fixture
def tsp3():
    return CvrpInstance("tsp3", 3, TSP3_MATRIX, vehicles=1, capacity=3)


def integer_instance(seed, n, vehicles=1, capacity=None, high=10, symmetric=False):
    """Random small-integer costs: every float operation on them is exact."""
    rng = np.random.default_rng(seed)
    m = rng.integers(0, high, size=(n + 1, n + 1)).astype(float)
    if symmetric:
        m = np.triu(m, 1)
        m = m + m.T
    np.fill_diagonal(m, 0.0)
    return CvrpInstance(f"int-{seed}-{n}", n, m, vehicles, capacity if capacity is not None else n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
