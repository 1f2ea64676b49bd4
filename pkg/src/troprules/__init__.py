"""Exact tropical Descartes-rule computations for real univariate polynomials."""

from .numeric import BracketedReal, LogValue, PrecisionExhausted
from .poly import Polynomial, RootCount, descartes_counts, sturm_count
from .tropical import analyze, central_index_check, tropicalize

__all__ = [
    "BracketedReal",
    "LogValue",
    "Polynomial",
    "PrecisionExhausted",
    "RootCount",
    "analyze",
    "central_index_check",
    "descartes_counts",
    "sturm_count",
    "tropicalize",
]

__version__ = "0.1.0"
