"""Progressive-sampling betweenness approximation with Rademacher bounds."""

from .engine import RunConfig, RunReport, run
from .errors import (DegenerateGraphError, EmptyGraphError, IntegrityError,
                     OracleTimeout, ParameterError, ParseError, ProgBCError)
from .graph import (Graph, brandes_exact, exact_vertex_diameter,
                    load_edge_list, vertex_diameter_upper_bound)
from .topk import TopKResult, run_topk

__version__ = "0.1.0"

__all__ = [
    "DegenerateGraphError", "EmptyGraphError", "Graph", "IntegrityError",
    "OracleTimeout", "ParameterError", "ParseError", "ProgBCError",
    "RunConfig", "RunReport", "TopKResult", "brandes_exact",
    "exact_vertex_diameter", "load_edge_list", "run", "run_topk",
    "vertex_diameter_upper_bound",
]
