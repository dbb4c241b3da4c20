"""Network features over distributional thesaurus graphs for co-hyponymy detection."""
from .graph import DTGraph, GraphFormatError, GraphValidationError, load_graph, loads_graph
from .features import (
    FEATURE_NAMES,
    FeatureConfig,
    FeatureVector,
    batch_features,
    compute_features,
    edge_density_intersection,
    edge_density_union,
    shortest_path,
    structural_similarity,
    weighted_shortest_path,
)

__version__ = "0.1.0"
