"""
Finite-rank JB*-triple algebra: factors, Bergmann operators, ball
automorphisms, spectral theory and boundary geometry.
"""
from jbtriple_kit.algebra.errors import TripleError
from jbtriple_kit.algebra.factors import (
    Element, FactorDescriptor, LinearMap, ConjugateLinearMap, make_factor, parse_factor,
)

__all__ = [
    "TripleError", "Element", "FactorDescriptor", "LinearMap", "ConjugateLinearMap",
    "make_factor", "parse_factor",
]
