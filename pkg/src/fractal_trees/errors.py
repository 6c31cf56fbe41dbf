"""Error hierarchy shared by the library and the CLI.

Library code raises these; only :mod:`fractal_trees.cli` turns them into exit
codes and ``{"error": code, "detail": str}`` payloads.
"""
from __future__ import annotations


class FractalTreesError(Exception):
    code = "error"
    exit_code = 1


class SchemaError(FractalTreesError):
    code = "schema_invalid"


class ValidationFailure(FractalTreesError):
    code = "validation_failed"


class GraphError(FractalTreesError):
    code = "graph_invalid"


class VerificationMismatch(FractalTreesError):
    code = "verification_mismatch"
    exit_code = 2


class InvariantBreach(FractalTreesError):
    code = "invariant_breach"
    exit_code = 2


class DecimationInapplicable(FractalTreesError):
    code = "decimation_inapplicable"
    exit_code = 3


class ResourceCapExceeded(FractalTreesError):
    code = "resource_cap"
    exit_code = 4


class ConfigError(FractalTreesError):
    code = "config_invalid"


class AlgebraError(FractalTreesError, ArithmeticError):
    code = "algebra_error"


class NotSquareError(AlgebraError):
    code = "not_square"


class SingularMatrixError(AlgebraError):
    code = "singular_matrix"


class PoleError(AlgebraError):
    code = "pole"


class ReducibleClassError(AlgebraError):
    code = "reducible_class"
