"""Dirac-Bergmann constraint analysis of lattice BF and generalized BF theories."""

from .analysis import AnalysisReport, run_analysis
from .brackets import bracket_matrix, numerical_rank, poisson_bracket
from .lattice import LatticeGeometry, make_state
from .models import ModelSpec

__all__ = [
    "AnalysisReport",
    "LatticeGeometry",
    "ModelSpec",
    "bracket_matrix",
    "make_state",
    "numerical_rank",
    "poisson_bracket",
    "run_analysis",
]
