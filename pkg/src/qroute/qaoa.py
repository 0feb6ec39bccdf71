"""QAOA driver: ansatz, classical optimisation loop, metrics, gate counts."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import engine
from .encoding import Layout, feasible_count, make_layout
from .errors import GuardError
from .model import CvrpInstance, Solution, canonical_routes, cluster_nodes, make_solution
from .oracle import OracleResult, brute_force_cvrp, brute_force_tsp
from .qubo import QuboModel, build_cost

ENCODINGS = ("onehot", "binary")
MIXERS = ("soft", "hard")
INITS = ("plus", "feasible", "basis")
WHT_MAX_QUBITS = 20


@dataclass(frozen=True)
class QaoaConfig:
    encoding: str = "binary"
    mixer: str = "hard"
    p: int = 1
    init: str | None = None  # None: "feasible" for the hard mixer, "plus" for soft
    basis_index: int | None = None
    max_evals: int = 2000
    tol: float = 1e-6
    restarts: int = 4
    seed: int = 0
    shots: int = 1024
    penalty: float | None = None
    grid: int = 24
    swap_gate_slope: int = 6
    swap_gate_intercept: int = -3
    qubit_ceiling: int = engine.MAX_QUBITS

    @property
    def initial_state(self) -> str:
        if self.init is not None:
            return self.init
        return "feasible" if self.mixer == "hard" else "plus"

    def validate(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"unknown encoding {self.encoding!r}")
        if self.mixer not in MIXERS:
            raise ValueError(f"unknown mixer {self.mixer!r}")
        if self.initial_state not in INITS:
            raise ValueError(f"unknown initial state {self.initial_state!r}")
        if self.p < 1:
            raise ValueError("depth p must be at least 1")
        if self.mixer == "hard" and self.encoding != "binary":
            raise GuardError("hard mixer requires binary encoding")
        if self.mixer == "hard" and self.initial_state == "plus":
            raise GuardError("hard mixer requires a feasible initial state")
        if self.initial_state == "basis" and self.basis_index is None:
            raise ValueError("basis initial state needs basis_index")
        if self.penalty is not None and self.penalty <= 0 and self.encoding == "onehot":
            raise GuardError("soft one-hot runs need a positive penalty weight")

    def swap_gate_cost(self, width: int) -> int:
        return self.swap_gate_slope * width + self.swap_gate_intercept


@dataclass(frozen=True)
class GateCount:
    two_qubit: int
    one_qubit: int

    def __add__(self, other: GateCount) -> GateCount:
        return GateCount(self.two_qubit + other.two_qubit, self.one_qubit + other.one_qubit)

    def __mul__(self, k: int) -> GateCount:
        return GateCount(self.two_qubit * k, self.one_qubit * k)


class Problem:
    """Everything a run needs that depends only on (config, instance)."""

    def __init__(self, config: QaoaConfig, instance: CvrpInstance):
        config.validate()
        self.config = config
        self.instance = instance
        self.layout: Layout = make_layout(config.encoding, instance)
        q = self.layout.num_qubits
        if q > config.qubit_ceiling:
            raise GuardError(f"{q} qubits exceeds the statevector ceiling of {config.qubit_ceiling}")
        if config.mixer == "hard" and self.layout.num_registers < 2:
            raise ValueError("hard mixer needs at least two registers (n >= 2)")
        self.cost = build_cost(instance, self.layout, config.penalty)
        self.table = self.cost.values()
        self.schedule = (
            engine.odd_even_schedule(self.layout.num_registers) if config.mixer == "hard" else []
        )

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    @cached_property
    def initial(self) -> np.ndarray:
        kind = self.config.initial_state
        if kind == "plus":
            return engine.init_plus(self.num_qubits)
        if kind == "feasible":
            return engine.init_feasible_uniform(self.layout)
        idx = self.config.basis_index
        if self.config.mixer == "hard" and not self.layout.decode(idx).feasible:
            raise GuardError(f"basis state {idx} is infeasible; the hard mixer needs a feasible start")
        return engine.init_basis(self.num_qubits, idx)

    def evolve(self, params) -> np.ndarray:
        p = self.config.p
        params = np.asarray(params, dtype=float)
        if params.shape != (2 * p,):
            raise ValueError(f"expected {2 * p} angles, got {params.shape}")
        sv = self.initial
        for gamma, theta in zip(params[:p], params[p:]):
            sv = engine.apply_phase(sv, self.table, gamma)
            if self.config.mixer == "hard":
                sv = engine.apply_hard_mixer(sv, self.layout, theta, self.schedule)
            else:
                sv = engine.apply_x_mixer(sv, theta)
        return sv

    @cached_property
    def oracle(self) -> OracleResult | None:
        try:
            if self.instance.is_tsp:
                return brute_force_tsp(self.instance)
            return brute_force_cvrp(self.instance)
        except GuardError:
            return None

    @cached_property
    def optimal_indices(self) -> np.ndarray | None:
        if self.oracle is None:
            return None
        return optimal_indices(self.layout, self.oracle, self.instance.is_tsp)


def optimal_indices(layout: Layout, oracle: OracleResult, tsp: bool | None = None) -> np.ndarray:
    """Feasible basis indices whose decoded solution is in the oracle's argmin set."""
    tsp = layout.shape.is_tsp if tsp is None else tsp
    targets = set(oracle.argmin)
    key = (lambda routes: routes[0]) if tsp else canonical_routes
    hits = [i for i in layout.feasible_indices if key(layout.decode(int(i)).routes) in targets]
    return np.array(hits, dtype=np.int64)


def run_ansatz(config: QaoaConfig, instance: CvrpInstance, params) -> np.ndarray:
    return Problem(config, instance).evolve(params)


@dataclass
class QaoaResult:
    gammas: tuple[float, ...]
    thetas: tuple[float, ...]
    objective: float
    trace: list[float]
    evaluations: int
    p_opt: float | None
    oracle_value: float | None
    best_index: int
    best_solution: Solution
    gates: GateCount
    max_leakage: float
    summary: engine.StateSummary
    num_qubits: int
    final_state: np.ndarray = field(repr=False)

    @property
    def params(self) -> np.ndarray:
        return np.array(self.gammas + self.thetas)

    @property
    def best_bitstring(self) -> str:
        return format(self.best_index, f"0{self.num_qubits}b")

    def to_dict(self) -> dict:
        return {
            "gammas": list(self.gammas),
            "thetas": list(self.thetas),
            "objective": self.objective,
            "p_opt": self.p_opt,
            "oracle_value": self.oracle_value,
            "best_solution": {
                "routes": [list(r) for r in self.best_solution.routes],
                "cost": self.best_solution.cost,
            },
            "best_bitstring": self.best_bitstring,
            "gate_counts": {"two_qubit": self.gates.two_qubit, "one_qubit": self.gates.one_qubit},
            "evaluations": self.evaluations,
            "max_leakage": self.max_leakage,
            "num_qubits": self.num_qubits,
            "top_states": [[i, pr] for i, pr in self.summary.top],
            "objective_trace": list(self.trace),
        }


def circuit_performance(state, oracle: OracleResult, layout: Layout) -> float:
    """Probability mass on basis states that decode to an oracle-optimal solution."""
    sv = state.final_state if isinstance(state, QaoaResult) else state
    idx = optimal_indices(layout, oracle)
    return float(engine.probabilities(sv)[idx].sum())


def _pick_candidate(problem: Problem, sv: np.ndarray) -> int:
    counts = engine.sample(sv, problem.config.shots, problem.config.seed)
    mask = problem.layout.feasible_mask
    sampled = [i for i in counts if mask[i]]
    if sampled:
        return min(sampled, key=lambda i: (problem.table[i], -counts[i], i))
    # nothing feasible was measured: fall back to the most probable feasible state
    feas = problem.layout.feasible_indices
    probs = engine.probabilities(sv)[feas]
    return int(feas[np.lexsort((feas, -probs))[0]])


def optimize(config: QaoaConfig, instance: CvrpInstance) -> QaoaResult:
    problem = Problem(config, instance)
    p = config.p
    hard = config.mixer == "hard"
    trace: list[float] = []
    best = {"value": np.inf, "params": None, "leak": 0.0}

    def objective(params):
        sv = problem.evolve(params)
        val = engine.expectation(sv, problem.table)
        if hard:
            best["leak"] = max(best["leak"], engine.leakage(sv, problem.layout))
        if val < best["value"]:
            best["value"], best["params"] = val, np.array(params, dtype=float)
        trace.append(best["value"])
        return val

    objective(np.zeros(2 * p))
    starts = []
    if p == 1:
        axis = np.arange(config.grid) * np.pi / config.grid
        grid = [(g, t) for g in axis for t in axis]
        vals = [objective(np.array(x)) for x in grid]
        starts.append(np.array(grid[int(np.argmin(vals))]))
    rng = np.random.default_rng(config.seed)
    starts += [rng.uniform(0.0, np.pi, 2 * p) for _ in range(config.restarts)]
    for x0 in starts:
        minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"maxfev": config.max_evals, "fatol": config.tol, "xatol": 1e-6},
        )

    params = best["params"]
    final = problem.evolve(params)
    idx = _pick_candidate(problem, final)
    solution = make_solution(instance, problem.layout.decode(idx).routes)
    p_opt = None
    if problem.optimal_indices is not None:
        p_opt = float(engine.probabilities(final)[problem.optimal_indices].sum())
    return QaoaResult(
        gammas=tuple(float(g) for g in params[:p]),
        thetas=tuple(float(t) for t in params[p:]),
        objective=float(best["value"]),
        trace=trace,
        evaluations=len(trace),
        p_opt=p_opt,
        oracle_value=problem.oracle.value if problem.oracle is not None else None,
        best_index=idx,
        best_solution=solution,
        gates=gate_count(config, instance, problem),
        max_leakage=float(best["leak"]),
        summary=engine.StateSummary.of(final),
        num_qubits=problem.num_qubits,
        final_state=final,
    )


def walsh_hadamard(values) -> np.ndarray:
    """Coefficients f(S) with values[x] = sum_S f(S) (-1)^{popcount(S & x)}."""
    a = np.array(values, dtype=float)
    q = engine.num_qubits(a)
    for h in range(q):
        view = a.reshape(-1, 2, 1 << h)
        lo, hi = view[:, 0, :].copy(), view[:, 1, :].copy()
        view[:, 0, :] = lo + hi
        view[:, 1, :] = lo - hi
    return a / a.size


def _popcounts(size: int) -> np.ndarray:
    idx = np.arange(size, dtype=np.int64)
    out = np.zeros(size, dtype=np.int64)
    while idx.any():
        out += idx & 1
        idx >>= 1
    return out


def diagonal_gate_count(table) -> GateCount:
    """Parity-phase decomposition of a diagonal unitary.

    Each nonzero Walsh coefficient of weight w >= 2 is charged w - 1 two-qubit
    gates and one rotation; weight-1 coefficients are single rotations.
    """
    coeffs = walsh_hadamard(table)
    weights = _popcounts(coeffs.size)
    scale = max(1.0, float(np.abs(coeffs).max()))
    nz = np.abs(coeffs) > 1e-9 * scale
    two = int((weights[nz & (weights >= 2)] - 1).sum())
    one = int((nz & (weights >= 1)).sum())
    return GateCount(two, one)


def qubo_gate_count(model: QuboModel) -> GateCount:
    """One ZZ rotation per quadratic term, one Z rotation per nonzero Ising field."""
    z = np.zeros(model.num_bits)
    for i, c in model.linear.items():
        z[i] -= c / 2
    for (i, j), c in model.quadratic.items():
        z[i] -= c / 4
        z[j] -= c / 4
    return GateCount(len(model.quadratic), int(np.count_nonzero(np.abs(z) > 1e-12)))


def gate_count(config: QaoaConfig, instance: CvrpInstance, problem: Problem | None = None) -> GateCount:
    problem = Problem(config, instance) if problem is None else problem
    q = problem.num_qubits
    if isinstance(problem.cost, QuboModel):
        layer = qubo_gate_count(problem.cost)
    elif q <= WHT_MAX_QUBITS:
        layer = diagonal_gate_count(problem.table)
    else:
        layer = GateCount(instance.n**3, q)
    if config.mixer == "hard":
        width = problem.layout.register_width
        layer = layer + GateCount(len(problem.schedule) * config.swap_gate_cost(width), 0)
    else:
        layer = layer + GateCount(0, q)
    return layer * config.p


def modeled_success(p_ideal: float, two_qubit: int, epsilon: float, outcomes: int) -> float:
    """Ideal success discounted by a per-two-qubit-gate error rate.

    With probability (1-eps)^G no gate fails and the ideal distribution is
    kept; otherwise the outcome is taken as uniform over ``outcomes`` states.
    """
    if not 0.0 <= p_ideal <= 1.0:
        raise ValueError("p_ideal must lie in [0, 1]")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    survive = (1.0 - epsilon) ** two_qubit
    return p_ideal * survive + (1.0 - survive) / outcomes


def outcome_space(config: QaoaConfig, instance: CvrpInstance) -> int:
    """States errors scatter over: the feasible set for hard runs, all 2^q otherwise."""
    layout = make_layout(config.encoding, instance)
    if config.mixer == "hard":
        return feasible_count(layout.kind, layout.shape)
    return 1 << layout.num_qubits


@dataclass
class PipelineReport:
    label: str
    config: QaoaConfig
    result: QaoaResult
    outcomes: int
    modeled: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "encoding": self.config.encoding,
            "mixer": self.config.mixer,
            "p": self.config.p,
            "p_ideal": self.result.p_opt,
            "two_qubit": self.result.gates.two_qubit,
            "one_qubit": self.result.gates.one_qubit,
            "outcome_space": self.outcomes,
            "modeled_success": self.modeled,
            "num_qubits": self.result.num_qubits,
        }


@dataclass
class Comparison:
    binary: PipelineReport
    standard: PipelineReport
    epsilon: float

    @property
    def error_reduction(self) -> float | None:
        """(1 - p_standard) / (1 - p_binary); None when the binary pipeline is error-free."""
        denom = 1.0 - self.binary.modeled
        if denom <= 0.0:
            return None
        return (1.0 - self.standard.modeled) / denom

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "binary_hard": self.binary.to_dict(),
            "onehot_penalty": self.standard.to_dict(),
            "error_reduction": self.error_reduction,
        }


def compare_pipelines(instance: CvrpInstance, epsilon: float, p: int = 1, seed: int = 0,
                      **overrides) -> Comparison:
    """Binary/hard-mixer versus one-hot/penalty with the transverse-field mixer."""
    reports = []
    for label, enc, mix in (("binary_hard", "binary", "hard"), ("onehot_penalty", "onehot", "soft")):
        cfg = QaoaConfig(encoding=enc, mixer=mix, p=p, seed=seed, **overrides)
        res = optimize(cfg, instance)
        if res.p_opt is None:
            raise GuardError("comparison needs the brute-force oracle; instance too large")
        D = outcome_space(cfg, instance)
        reports.append(PipelineReport(label, cfg, res, D, modeled_success(res.p_opt, res.gates.two_qubit, epsilon, D)))
    return Comparison(reports[0], reports[1], epsilon)


@dataclass
class ClusterFirstResult:
    solution: Solution
    clusters: list[list[int]]
    runs: list[QaoaResult | None]
    cluster_optimal: list[bool | None]
    cluster_oracle_values: list[float | None]

    def to_dict(self) -> dict:
        return {
            "routes": [list(r) for r in self.solution.routes],
            "cost": self.solution.cost,
            "clusters": [
                {
                    "nodes": nodes,
                    "route": list(route),
                    "oracle_value": val,
                    "cluster_optimal": ok,
                    "p_opt": run.p_opt if run is not None else None,
                    "gate_counts": (
                        {"two_qubit": run.gates.two_qubit, "one_qubit": run.gates.one_qubit}
                        if run is not None else None
                    ),
                }
                for nodes, route, val, ok, run in zip(
                    self.clusters, self.solution.routes, self.cluster_oracle_values,
                    self.cluster_optimal, self.runs,
                )
            ],
        }


def solve_cvrp_cluster_first(instance: CvrpInstance, config: QaoaConfig) -> ClusterFirstResult:
    """Cluster nodes per vehicle, then solve each cluster's TSP with QAOA.

    Clusters of at most one node have a single route and skip the quantum step.
    """
    clusters = cluster_nodes(instance)
    routes, runs, optimal, values = [], [], [], []
    for k, nodes in enumerate(clusters):
        if len(nodes) <= 1:
            routes.append(tuple(nodes))
            runs.append(None)
            optimal.append(True)
            values.append(None)
            continue
        sub = instance.subinstance(nodes, name=f"{instance.name}#cluster{k}")
        res = optimize(config, sub)
        local = res.best_solution.routes[0]
        routes.append(tuple(nodes[u - 1] for u in local))
        runs.append(res)
        if res.oracle_value is not None:
            optimal.append(res.best_solution.cost == res.oracle_value)
        else:
            optimal.append(None)
        values.append(res.oracle_value)
    routes += [()] * (instance.vehicles - len(routes))
    return ClusterFirstResult(make_solution(instance, routes), clusters, runs, optimal, values)


def solve(instance: CvrpInstance, config: QaoaConfig):
    """Single-vehicle instances go straight to QAOA, multi-vehicle ones cluster first."""
    if instance.is_tsp:
        return optimize(config, instance)
    return solve_cvrp_cluster_first(instance, config)
