"""Directed height of partial graph maps and negative immersions of their mapping tori."""

__version__ = "0.1.0"

from .graphs import EdgePath, Graph, GraphError, boundary_vertices, classify_components, core, euler_char, is_forest
from .maps import (
    INFINITE,
    GraphMap,
    domain_filtration,
    directed_height,
    fan_from_edge,
    generalized_compose,
    subdivide_to_combinatorial,
    validate_map,
)
from .folding import (
    Unknown,
    core_graph_of_words,
    directed_height_general,
    fiber_product,
    fold_to_immersion,
    image_trace,
    is_pi1_injective,
    rose,
)
from .torus import (
    NegativeImmersions,
    NotPi1Injective,
    Undecided,
    ZeroEulerWitness,
    build_mapping_torus,
    complex_checks,
    compute_N,
    decide_negative_immersions,
    reducibility_witness,
    zero_euler_witness,
)

__all__ = [
    "__version__",
    "EdgePath",
    "Graph",
    "GraphError",
    "boundary_vertices",
    "classify_components",
    "core",
    "euler_char",
    "is_forest",
    "INFINITE",
    "GraphMap",
    "domain_filtration",
    "directed_height",
    "fan_from_edge",
    "generalized_compose",
    "subdivide_to_combinatorial",
    "validate_map",
    "Unknown",
    "core_graph_of_words",
    "directed_height_general",
    "fiber_product",
    "fold_to_immersion",
    "image_trace",
    "is_pi1_injective",
    "rose",
    "NegativeImmersions",
    "NotPi1Injective",
    "Undecided",
    "ZeroEulerWitness",
    "build_mapping_torus",
    "complex_checks",
    "compute_N",
    "decide_negative_immersions",
    "reducibility_witness",
    "zero_euler_witness",
]
