"""Exact Shapley values for locally collaborative games, applied to freight forwarder collaboration."""

from .errors import GuardError, InfeasibleError, LocalityError
from .ffcg import (
    Assignment,
    FfcgGame,
    FfcgInstance,
    PortPair,
    Request,
    Service,
    build_collaboration_graph,
    decompose_by_port_pair,
    exact_binpack,
    ffcg_characteristic,
    ffd_greedy,
    pairwise_shapley,
    phi,
    savings_report,
)
from .graph import AgentGraph, coalition, connected_components, neighbor_subsets, neighbors
from .scenarios import ScenarioConfig, generate, generate_power_law, generate_small_world, generate_uniform
from .shapley import (
    CharacteristicFunction,
    FunctionGame,
    ShapleyResult,
    TableGame,
    baseline_graph_restricted_shapley,
    check_local_collaboration,
    exact_shapley_bruteforce,
    fs_lcg_shapley,
    permutation_weight,
)

__version__ = "0.1.0"
