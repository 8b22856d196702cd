"""Persistency-based instance shrinking for multicut and max-cut problems."""

from .graphs import (MAXCUT, MULTICUT, ContractViolation, ParseError,
                     ProblemInstance, Subgraph, connected_components,
                     contract_edge, delta, enumerate_triangles, is_feasible,
                     objective, total_objective)
from .certificates import PersistencyCertificate

__all__ = [
    "MAXCUT", "MULTICUT", "ContractViolation", "ParseError", "ProblemInstance",
    "Subgraph", "PersistencyCertificate", "connected_components",
    "contract_edge", "delta", "enumerate_triangles", "is_feasible",
    "objective", "total_objective",
]

__version__ = "0.1.0"
