"""Assignment and partial-ordering ILP models for vertex coloring.

Eight model variants over an exact rational LP core, a small
branch-and-bound driver, DIMACS and MPS I/O and a benchmark harness.
"""

from .bnb import BnbConfig, MipResult, MipStatus, solve_mip
from .graph import Graph, DimacsError, connected_components, density, parse_dimacs, read_dimacs
from .lp import LpSolution, LpStatus, relax, solve_lp
from .models import IlpModel, ModelKind, apply_precoloring, build_model, extract_coloring, nonzero_count
from .preprocess import preprocess_pipeline

__all__ = [
    "BnbConfig",
    "DimacsError",
    "Graph",
    "IlpModel",
    "LpSolution",
    "LpStatus",
    "MipResult",
    "MipStatus",
    "ModelKind",
    "apply_precoloring",
    "build_model",
    "connected_components",
    "density",
    "extract_coloring",
    "nonzero_count",
    "parse_dimacs",
    "preprocess_pipeline",
    "read_dimacs",
    "relax",
    "solve_lp",
    "solve_mip",
]

__version__ = "0.1.0"
