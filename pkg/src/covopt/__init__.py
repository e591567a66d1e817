"""Covering options: option discovery by maximizing algebraic connectivity."""

from .cover_time import (CoverTimeEstimate, RandomWalk, correlation_study, cover_time_upper_bound,
                         estimate_cover_time, random_connected_graph, random_policy_cost,
                         sample_cover_time, value_bound_check)
from .estimators import (BetweennessOptions, CoverTimeEstimator, CoveringOptions, EigenOptions,
                         SpectralDrawing)
from .graph import Graph, graph_from_mdp, parse_edge_list, read_edge_list, write_edge_list
from .options import (OptionSet, PointOption, betweenness_options, covering_options,
                      eigenoptions_point, option_policy, theorem2_increment, widen_initiation)
from .spectral import (Spectrum, algebraic_connectivity, normalized_laplacian, smallest_eigenpairs,
                       spectral_drawing)

__version__ = "0.1.0"

__all__ = [
    "BetweennessOptions", "CoverTimeEstimate", "CoverTimeEstimator", "CoveringOptions",
    "EigenOptions", "Graph", "OptionSet", "PointOption", "RandomWalk", "SpectralDrawing",
    "Spectrum", "algebraic_connectivity", "betweenness_options", "correlation_study",
    "cover_time_upper_bound", "covering_options", "eigenoptions_point", "estimate_cover_time",
    "graph_from_mdp", "normalized_laplacian", "option_policy", "parse_edge_list",
    "random_connected_graph", "random_policy_cost", "read_edge_list", "sample_cover_time",
    "smallest_eigenpairs", "spectral_drawing", "theorem2_increment", "value_bound_check",
    "widen_initiation", "write_edge_list",
]
