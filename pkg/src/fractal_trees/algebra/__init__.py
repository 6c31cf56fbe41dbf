"""Exact arithmetic substrate: polynomials, rational functions, matrices, factored integers."""
from .integers import FactoredInteger, FactoredRational
from .matrices import RatFuncMatrix, RatMatrix, char_poly, det_fraction_free, solve_linear_ratfunc
from .polynomials import (
    X,
    Factorization,
    RationalFunction,
    RationalValue,
    UniPoly,
    factor_rational,
    image_class,
    irreducible_factors,
    is_irreducible,
    preimage_poly,
    to_fraction,
)

BigIntValue = int

__all__ = [
    "BigIntValue",
    "FactoredInteger",
    "FactoredRational",
    "Factorization",
    "RatFuncMatrix",
    "RatMatrix",
    "RationalFunction",
    "RationalValue",
    "UniPoly",
    "X",
    "char_poly",
    "det_fraction_free",
    "factor_rational",
    "image_class",
    "irreducible_factors",
    "is_irreducible",
    "preimage_poly",
    "solve_linear_ratfunc",
    "to_fraction",
]
