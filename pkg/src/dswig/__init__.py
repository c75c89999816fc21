"""dswig: causal-graph tooling for difference-in-differences.

Builds annotated causal DAGs, transforms them into single world
intervention graphs and difference-augmented variants, answers
d-separation queries, derives valid adjustment sets for group-time
treatment effects under configurable model restrictions, and validates the
theory with a built-in panel simulator and conditional DiD estimator.
"""

from .dsep import DsepQuery, d_separated, d_separated_oracle, explain, implied_ci
from .dsl import parse_document, parse_graph, parse_query, serialize_graph
from .dot import to_dot
from .errors import (
    AdjustError,
    DswigError,
    EstimationError,
    GraphError,
    ParseError,
    QueryError,
    SimulationError,
    TransformError,
)
from .graph import CausalGraph, Edge, EdgeLabel, Node
from .transform import (
    DeltaSpec,
    DeltaSwig,
    Intervention,
    Swig,
    add_difference,
    apply_swig,
    prune,
    run_pipeline,
)

__all__ = [
    "AdjustError",
    "CausalGraph",
    "DeltaSpec",
    "DeltaSwig",
    "DsepQuery",
    "DswigError",
    "Edge",
    "EdgeLabel",
    "EstimationError",
    "GraphError",
    "Intervention",
    "Node",
    "ParseError",
    "QueryError",
    "SimulationError",
    "Swig",
    "TransformError",
    "add_difference",
    "apply_swig",
    "d_separated",
    "d_separated_oracle",
    "explain",
    "implied_ci",
    "parse_document",
    "parse_graph",
    "parse_query",
    "prune",
    "run_pipeline",
    "serialize_graph",
    "to_dot",
]

__version__ = "0.1.0"
