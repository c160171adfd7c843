"""Decentralized first-order optimization over directed graphs, centered on FROST."""
from .algorithms import ALGORITHMS, NetworkState, StepSizes
from .digraph import Digraph, gen_random_strongly_connected, gen_ring, parse_graph_spec
from .harness import ExperimentConfig, build_setup, run_experiment, tune_step_size
from .oracle import fit_linear_rate, solve_centralized
from .weights import StochasticMatrix, build_weights, contraction_estimate, perron_left

__all__ = [
    "ALGORITHMS", "NetworkState", "StepSizes", "Digraph", "gen_random_strongly_connected",
    "gen_ring", "parse_graph_spec", "ExperimentConfig", "build_setup", "run_experiment",
    "tune_step_size", "fit_linear_rate", "solve_centralized", "StochasticMatrix",
    "build_weights", "contraction_estimate", "perron_left",
]
