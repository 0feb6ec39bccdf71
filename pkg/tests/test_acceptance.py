"""Acceptance criteria 1-10, one pass/fail line each in the terminal summary."""
import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, TSP2_MATRIX, TSP3_MATRIX, integer_instance
from qroute import engine
from qroute.cli import main
from qroute.encoding import BinaryLayout, OneHotLayout, Shape, feasible_fraction
from qroute.model import CvrpInstance, generate_instance, route_cost
from qroute.oracle import brute_force_cvrp, brute_force_tsp, qubo_min
from qroute.qaoa import QaoaConfig, compare_pipelines, optimize, solve_cvrp_cluster_first
from qroute.qubo import build_binary_cost, build_tsp_onehot

DATA = Path(__file__).resolve().parent.parent / "data"


def record(k: int, limit: float, check, detail=lambda out: ""):
    """Run ``check``, time it, log one line, then fail the test if needed."""
    start = time.perf_counter()
    error, out = None, None
    try:
        out = check()
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - start
    slow = elapsed >= limit
    ok = error is None and not slow
    note = detail(out) if error is None else f"assertion: {error}"
    ACCEPTANCE_LINES.append(
        f"CRITERION {k}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s, limit {limit:g}s) {note}".rstrip()
    )
    if error is not None:
        raise error
    assert not slow, f"criterion {k} took {elapsed:.2f}s, limit {limit}s"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    assert code == 0, err
    return out


def test_criterion_01_resource_counts(capsys):
    def check():
        out = run_cli(capsys, "scaling", "-V", "7", "-C", "20", "--n-min", "1", "--n-max", "140",
                      "--paper-mode", "--no-timestamp")
        rows = {}
        for line in out.splitlines()[1:]:
            if not line.startswith("#"):
                n, one, binary = map(int, line.split(","))
                rows[n] = (one, binary)
        assert rows[100] == (14000, 980)
        for lo, hi in ((2, 2), (3, 4), (5, 8), (9, 16), (17, 32), (33, 64), (65, 128)):
            assert len({rows[n][1] for n in range(lo, hi + 1)}) == 1, (lo, hi)
            assert rows[hi][1] == 140 * math.ceil(math.log2(hi))
        assert rows[100][1] <= 1121 < rows[100][0]
        return rows[100]

    record(1, 1.0, check, lambda r: f"n=100 one-hot={r[0]} binary={r[1]}")


def test_criterion_02_tsp2_gate_count():
    def check():
        inst = CvrpInstance("tsp2", 2, TSP2_MATRIX, 1, 2)
        res = optimize(QaoaConfig(encoding="binary", mixer="hard", p=1, restarts=1), inst)
        assert res.gates.two_qubit == 4
        return res.gates.two_qubit

    record(2, 1.0, check, lambda g: f"two-qubit gates={g}")


def test_criterion_03_tsp2_ideal():
    def check():
        inst = CvrpInstance("tsp2", 2, TSP2_MATRIX, 1, 2)
        res = optimize(QaoaConfig(encoding="binary", mixer="hard", p=1), inst)
        assert res.p_opt >= 0.99
        assert res.best_solution.cost == 3.0
        return res.p_opt

    record(3, 5.0, check, lambda p: f"P_opt={p:.6f} (>= 0.99)")


def test_criterion_04_pipeline_ordering():
    def check():
        inst = CvrpInstance("tsp2", 2, TSP2_MATRIX, 1, 2)
        comp = compare_pipelines(inst, 0.01)
        assert comp.binary.modeled > comp.standard.modeled
        assert comp.error_reduction is not None and comp.error_reduction > 1
        return comp

    record(4, 30.0, check, lambda c: (
        f"binary={c.binary.modeled:.4f} one-hot={c.standard.modeled:.4f} "
        f"error_reduction={c.error_reduction:.3f}"))


def _routes_of(layout, indices):
    out = set()
    for i in indices:
        d = layout.decode(i)
        assert d.feasible, f"minimiser {i} is infeasible"
        out.add(d.routes[0])
    return out


def test_criterion_05_oracle_equivalence():
    def check():
        checked = 0
        for seed in range(50):
            n = 2 + seed % 3  # 2, 3, 4
            inst = integer_instance(seed, n)
            truth = brute_force_tsp(inst)
            if n <= 3:
                model = build_tsp_onehot(inst)
                got = qubo_min(model)
                assert got.value == truth.value, (seed, n, got.value, truth.value)
                assert _routes_of(OneHotLayout(Shape.tsp(n)), got.argmin) == set(truth.argmin)
                checked += 1
            layout = BinaryLayout(Shape.tsp(n))
            cost = build_binary_cost(inst, layout)
            # minimise over the feasible subspace, where hard-mixer runs live
            feas = layout.feasible_indices
            vals = cost.values()[feas]
            best = vals.min()
            assert best == truth.value, (seed, n, best, truth.value)
            assert _routes_of(layout, feas[vals == best]) == set(truth.argmin)
            if cost.infeasible_value > truth.value:
                full = qubo_min(cost)
                assert full.value == truth.value
                assert _routes_of(layout, full.argmin) == set(truth.argmin)
            checked += 1
        return checked

    record(5, 60.0, check, lambda c: f"{c} model/oracle pairs over 50 instances, exact")


def test_criterion_06_subspace_preservation():
    def check():
        rng = np.random.default_rng(6)
        worst_leak, worst_norm = 0.0, 0.0
        for n in (2, 3, 4):
            layout = BinaryLayout(Shape.tsp(n))
            for trial in range(5):
                inst = generate_instance(100 * n + trial, n)
                cost = build_binary_cost(inst, layout)
                feas = layout.feasible_indices
                if trial % 2:
                    sv = engine.init_basis(layout.num_qubits, int(rng.choice(feas)))
                else:
                    sv = np.zeros(1 << layout.num_qubits, dtype=complex)
                    sv[feas] = rng.normal(size=len(feas)) + 1j * rng.normal(size=len(feas))
                    sv /= np.linalg.norm(sv)
                for _ in range(20):
                    if rng.random() < 0.5:
                        sv = engine.apply_hard_mixer(sv, layout, rng.uniform(-np.pi, np.pi))
                    else:
                        sv = engine.apply_phase(sv, cost, rng.uniform(-np.pi, np.pi))
                    worst_leak = max(worst_leak, engine.leakage(sv, layout))
                    worst_norm = max(worst_norm, abs(np.linalg.norm(sv) - 1.0))
        assert worst_leak <= 1e-12
        assert worst_norm <= 1e-10
        return worst_leak, worst_norm

    record(6, 60.0, check, lambda r: f"max leakage={r[0]:.2e} max |norm-1|={r[1]:.2e}")


def test_criterion_07_feasible_fraction():
    def check():
        rows = []
        for n in range(2, 13):
            frac = feasible_fraction("binary", Shape.tsp(n))
            m = max(1, math.ceil(math.log2(n)))
            assert frac == Fraction(math.factorial(n), 2 ** (n * m))
            bound = math.sqrt(2 * math.pi * n) * math.exp(-n) * math.exp(1 / (12 * n))
            assert float(frac) <= bound, (n, float(frac), bound)
            rows.append(n)
        return rows

    record(7, 1.0, check, lambda r: f"n={r[0]}..{r[-1]} within the Stirling bound")


def test_criterion_08_tsp3_depth2():
    def check():
        inst = CvrpInstance("tsp3", 3, TSP3_MATRIX, 1, 3)
        p_opts = []
        for seed in range(5):
            res = optimize(QaoaConfig(encoding="binary", mixer="hard", p=2, seed=seed), inst)
            assert res.best_solution.cost == 14.0, (seed, res.best_solution)
            assert res.p_opt > 1 / 6, (seed, res.p_opt)
            p_opts.append(res.p_opt)
        return p_opts

    record(8, 120.0, check, lambda ps: f"cost 14 on seeds 0..4, min P_opt={min(ps):.4f} (> 1/6)")


CLUSTER_CASES = [
    (3, 2, 2), (4, 2, 2), (4, 2, 3), (5, 2, 3), (5, 3, 2),
    (6, 2, 3), (6, 3, 2), (6, 2, 4), (7, 2, 4), (7, 3, 3),
]


def test_criterion_09_cluster_first():
    def check():
        gaps = []
        config = QaoaConfig(encoding="binary", mixer="hard", p=1, restarts=2)
        for seed, (n, V, C) in enumerate(CLUSTER_CASES):
            inst = generate_instance(900 + seed, n, V, C)
            res = solve_cvrp_cluster_first(inst, config)
            routes = res.solution.routes
            assert sorted(u for r in routes for u in r) == list(range(1, n + 1))
            assert all(len(r) <= C for r in routes) and len(routes) == V
            for nodes, route in zip(res.clusters, routes):
                assert sorted(route) == sorted(nodes)
                if len(nodes) > 1:
                    best = brute_force_tsp(inst.subinstance(nodes)).value
                    assert route_cost(inst, route) == pytest.approx(best, abs=1e-9), (seed, nodes)
            opt = brute_force_cvrp(inst).value
            assert res.solution.cost >= opt - 1e-9
            gaps.append((res.solution.cost - opt) / opt if opt else 0.0)
        return gaps

    record(9, 120.0, check, lambda g: (
        f"{len(g)} instances feasible and cluster-optimal, gap mean={np.mean(g):.3f} max={max(g):.3f}"))


def test_criterion_10_determinism(capsys, tmp_path):
    def check():
        gen = tmp_path / "g.json"
        run_cli(capsys, "generate", "--n", "3", "--seed", "3", "--out", str(gen))
        cvrp = tmp_path / "c.json"
        run_cli(capsys, "generate", "--n", "4", "-V", "2", "-C", "2", "--seed", "3", "--out", str(cvrp))
        commands = [
            ["solve", str(gen), "--seed", "11"],
            ["solve", str(cvrp), "--seed", "11"],
            ["solve", str(DATA / "tsp2.json"), "--encoding", "onehot", "--mixer", "soft", "--seed", "2"],
            ["oracle", str(DATA / "tsp3.json")],
            ["scaling", "--paper-mode"],
            ["demo-tsp2", "--epsilon", "0.01"],
            ["compare", str(DATA / "tsp2.json")],
            ["generate", "--n", "5", "--seed", "9"],
        ]
        for cmd in commands:
            first = run_cli(capsys, "--no-timestamp", *cmd)
            second = run_cli(capsys, "--no-timestamp", *cmd)
            assert first == second, cmd
            if cmd[0] not in ("scaling", "generate"):
                assert "generated_at" not in json.loads(first)
        return len(commands)

    record(10, 10.0, check, lambda c: f"{c} commands byte-identical on rerun")
