"""Simulation and exact analysis of the biased naming game on graphs."""
from .engine import Configuration, Outcome, SimOutcome, run, run_batch, run_coupled, supermartingale_drift
from .graphs import Graph, from_edge_list, from_spec
from .model import DerivedProbs, FitnessParams, State, derive, pair_transition

__all__ = [
    "Configuration", "DerivedProbs", "FitnessParams", "Graph", "Outcome", "SimOutcome", "State",
    "derive", "from_edge_list", "from_spec", "pair_transition", "run", "run_batch", "run_coupled",
    "supermartingale_drift",
]
