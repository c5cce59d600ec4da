"""Exact-arithmetic toolkit for algebraic networks over F_p and Q."""

from .field import FieldElement, FieldSpec
from .polynomial import GridSpec, SparsePoly, poly_zero_oracle

__version__ = "0.1.0"

__all__ = ["FieldElement", "FieldSpec", "GridSpec", "SparsePoly", "poly_zero_oracle", "__version__"]
