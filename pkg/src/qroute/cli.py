"""Command-line front end.

Exit codes: 0 success, 1 error, 2 guard refusal (size limits, invalid run config).
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import Shape, ceil_log2, qubit_count
from .errors import GuardError
from .model import CvrpInstance, dump_instance, generate_instance, load_instance
from .oracle import brute_force_cvrp, brute_force_tsp
from .qaoa import QaoaConfig, compare_pipelines, modeled_success, optimize, outcome_space, solve

HARDWARE_LINES = (127, 433, 1121)


def _round(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, command: str, body: dict) -> str:
    doc = {"command": command, "version": __version__, "seed": args.seed}
    if not args.no_timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc.update(body)
    return json.dumps(_round(doc), indent=2, allow_nan=False) + "\n"


def _read_instance(path: str) -> CvrpInstance:
    return load_instance(Path(path).read_text(encoding="utf-8"))


def _config(args) -> QaoaConfig:
    return QaoaConfig(
        encoding=args.encoding,
        mixer=args.mixer,
        p=args.p,
        restarts=args.restarts,
        shots=args.shots,
        penalty=args.penalty,
        seed=args.seed,
    )


def cmd_solve(args) -> int:
    instance = _read_instance(args.instance)
    config = _config(args)
    config.validate()
    result = solve(instance, config)
    body = {"instance": instance.name, "encoding": config.encoding, "mixer": config.mixer, "p": config.p}
    body["result"] = result.to_dict()
    _emit(_report(args, "solve", body), args.out)
    return 0


def cmd_oracle(args) -> int:
    instance = _read_instance(args.instance)
    if instance.is_tsp:
        res = brute_force_tsp(instance)
        optima = [{"routes": [list(r)]} for r in res.argmin]
    else:
        res = brute_force_cvrp(instance)
        optima = [{"routes": [list(r) for r in sol]} for sol in res.argmin]
    body = {"instance": instance.name, "value": res.value, "num_optima": len(optima), "optima": optima}
    _emit(_report(args, "oracle", body), args.out)
    return 0


def scaling_rows(vehicles: int, capacity: int, n_min: int, n_max: int, paper_mode: bool = False):
    width = "paper" if paper_mode else "marker"
    for n in range(n_min, n_max + 1):
        shape = Shape.cvrp(n, capacity, vehicles)
        yield n, qubit_count("onehot", shape), qubit_count("binary", shape, slot_width=width)


def max_nodes_fitting(kind: str, qubits: int, vehicles: int, capacity: int, paper_mode: bool,
                      limit: int = 1 << 20) -> int:
    """Largest n whose encoding fits in ``qubits`` (0 if none)."""
    best = 0
    if kind == "onehot":
        return qubits // (capacity * vehicles)
    # binary count only grows at powers of two, so stepping across them is enough
    n = 1
    while n <= limit:
        width = ceil_log2(n) if paper_mode else ceil_log2(n + 1)
        if capacity * vehicles * width <= qubits:
            best = (1 << width) if paper_mode else (1 << width) - 1
            n = best + 1
        else:
            break
    return best


def cmd_scaling(args) -> int:
    if min(args.vehicles, args.capacity, args.n_min, args.n_max) < 1 or args.n_min > args.n_max:
        raise ValueError("scaling ranges must be positive with n_min <= n_max")
    lines = ["n,onehot_qubits,binary_qubits"]
    for n, one, binary in scaling_rows(args.vehicles, args.capacity, args.n_min, args.n_max, args.paper_mode):
        lines.append(f"{n},{one},{binary}")
    mode = "paper" if args.paper_mode else "marker"
    lines.append(f"# vehicles={args.vehicles} capacity={args.capacity} slot_width={mode}")
    for hw in args.hardware:
        one = max_nodes_fitting("onehot", hw, args.vehicles, args.capacity, args.paper_mode)
        binary = max_nodes_fitting("binary", hw, args.vehicles, args.capacity, args.paper_mode)
        lines.append(f"# hardware_qubits={hw} max_n_onehot={one} max_n_binary={binary}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_demo_tsp2(args) -> int:
    c = [args.c01, args.c02, args.c10, args.c12, args.c20, args.c21]
    if any(x < 0 for x in c):
        raise ValueError("negative cost")
    matrix = [[0.0, args.c01, args.c02], [args.c10, 0.0, args.c12], [args.c20, args.c21, 0.0]]
    instance = CvrpInstance("tsp2-demo", 2, matrix, 1, 2)
    config = QaoaConfig(encoding="binary", mixer="hard", p=1, seed=args.seed)
    result = optimize(config, instance)
    oracle = brute_force_tsp(instance)
    body = {
        "matrix": matrix,
        "optimal_orderings": [list(r) for r in oracle.argmin],
        "optimal_cost": oracle.value,
        "best_ordering": list(result.best_solution.routes[0]),
        "p_opt": result.p_opt,
        "mixer_angle": result.thetas[0],
        "phase_angle": result.gammas[0],
        "two_qubit_gates": result.gates.two_qubit,
        "one_qubit_gates": result.gates.one_qubit,
    }
    if args.epsilon is not None:
        D = outcome_space(config, instance)
        body["epsilon"] = args.epsilon
        body["modeled_success"] = modeled_success(result.p_opt, result.gates.two_qubit, args.epsilon, D)
    _emit(_report(args, "demo-tsp2", body), args.out)
    return 0


def cmd_compare(args) -> int:
    instance = _read_instance(args.instance)
    comp = compare_pipelines(instance, args.epsilon, p=args.p, seed=args.seed)
    body = {"instance": instance.name, **comp.to_dict()}
    _emit(_report(args, "compare", body), args.out)
    return 0


def cmd_generate(args) -> int:
    inst = generate_instance(args.seed, args.n, args.vehicles, args.capacity, args.box, name=args.name)
    _emit(dump_instance(inst), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommand copies must not overwrite values given before the subcommand
        flags = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        flags.add_argument("--seed", type=int, default=d(0))
        flags.add_argument("--out", default=d(None), help="write the report here instead of stdout")
        flags.add_argument("--no-timestamp", action="store_true", default=d(False))
        return flags

    common = global_flags(suppress=True)
    parser = argparse.ArgumentParser(
        prog="qroute", description=__doc__, parents=[global_flags(suppress=False)],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p):
        p.add_argument("--encoding", choices=["onehot", "binary"], default="binary")
        p.add_argument("--mixer", choices=["soft", "hard"], default="hard")
        p.add_argument("--p", type=int, default=1)
        p.add_argument("--restarts", type=int, default=4)
        p.add_argument("--shots", type=int, default=1024)
        p.add_argument("--penalty", type=float, default=None)

    p = sub.add_parser("solve", parents=[common], help="QAOA solve of an instance file")
    p.add_argument("instance")
    run_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", parents=[common], help="brute-force optimum")
    p.add_argument("instance")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("scaling", parents=[common], help="qubit counts, one-hot vs binary")
    p.add_argument("--vehicles", "-V", type=int, default=7)
    p.add_argument("--capacity", "-C", type=int, default=20)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=140)
    p.add_argument("--paper-mode", action="store_true",
                   help="binary slot width ceil(log2 n) without an empty marker")
    p.add_argument("--hardware", type=int, nargs="*", default=list(HARDWARE_LINES))
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("demo-tsp2", parents=[common], help="depot + two nodes, binary/hard p=1")
    for name, default in (("c01", 1.0), ("c02", 4.0), ("c10", 2.0), ("c12", 1.0), ("c20", 1.0), ("c21", 3.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_demo_tsp2)

    p = sub.add_parser("compare", parents=[common], help="binary/hard vs one-hot/penalty")
    p.add_argument("instance")
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--p", type=int, default=1)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", parents=[common], help="random Euclidean instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--vehicles", "-V", type=int, default=1)
    p.add_argument("--capacity", "-C", type=int, default=None)
    p.add_argument("--box", type=float, default=10.0)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
