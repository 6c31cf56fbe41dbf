"""Exact spanning-tree counts on self-similar fractal graphs."""
from .counting import (
    ComplexityEstimate,
    TreeCount,
    bounds_check,
    complexity_constant,
    preiterate_product,
    tau_decimation,
    verify,
)
from .decimation import charpoly_check, classify_exceptional, schur_extract, spectrum, spectrum_dump, value_sets
from .fractal_model import Multigraph, build_graph, degree_stats, validate_schema, vertex_count
from .matrix_tree import tau_cofactor, tau_probabilistic
from .schema_loader import builtin_schemas, load_schema, resolve_schema
from .state import SubstitutionSchema

__version__ = "0.1.0"

__all__ = [
    "ComplexityEstimate",
    "Multigraph",
    "SubstitutionSchema",
    "TreeCount",
    "bounds_check",
    "build_graph",
    "builtin_schemas",
    "charpoly_check",
    "classify_exceptional",
    "complexity_constant",
    "degree_stats",
    "load_schema",
    "preiterate_product",
    "resolve_schema",
    "schur_extract",
    "spectrum",
    "spectrum_dump",
    "tau_cofactor",
    "tau_decimation",
    "tau_probabilistic",
    "validate_schema",
    "value_sets",
    "verify",
    "vertex_count",
]
