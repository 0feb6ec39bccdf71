"""Exactly simulated QAOA for small vehicle-routing problems."""
from .errors import GuardError
from .model import (
    CvrpInstance, Solution, cluster_nodes, dump_instance, generate_instance, load_instance,
    make_solution, route_cost, solution_cost,
)

__version__ = "0.1.0"
