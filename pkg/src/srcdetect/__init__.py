"""Contagion source detection on graphs: SI simulation, likelihoods,
centralities, detection asymptotics and protection-node placement."""

from .graph_core import Graph, GraphError, from_edge_list, generate
from .spread import Snapshot, StopRule, simulate_si

__all__ = ["Graph", "GraphError", "Snapshot", "StopRule", "from_edge_list", "generate", "simulate_si"]
__version__ = "0.1.0"
