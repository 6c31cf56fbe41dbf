"""
Spanning-tree oracles on explicit multigraphs.

Kirchhoff: delete row and column 0 of the graph Laplacian ``G = D - A`` and
take the determinant. The probabilistic form uses ``P = D^{-1} G`` instead:
the product of its nonzero eigenvalues, read off the degree-1 coefficient of
``det(P - xI)``, times ``prod(d) / sum(d)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra.matrices import RatMatrix, char_poly, det_fraction_free
from .errors import GraphError, InvariantBreach
from .fractal_model import Multigraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LaplacianPair:
    G: RatMatrix
    P: RatMatrix
    degrees: tuple[int, ...]


def laplacians(g: Multigraph) -> LaplacianPair:
    degrees = g.degrees()
    isolated = [v for v, d in enumerate(degrees) if d == 0]
    if isolated:
        raise GraphError(f"isolated vertices {isolated[:5]} make D singular")
    n = g.vertex_count
    rows = [[0] * n for _ in range(n)]
    for u, v, k in g.edges:
        rows[u][v] -= k
        rows[v][u] -= k
    for v, d in enumerate(degrees):
        rows[v][v] = d
    G = RatMatrix.of(rows)
    P = RatMatrix.of([[Fraction(a, degrees[i]) for a in row] for i, row in enumerate(rows)])
    return LaplacianPair(G=G, P=P, degrees=tuple(degrees))


def _trivial(g: Multigraph) -> bool:
    return g.vertex_count == 1


def tau_cofactor(g: Multigraph) -> int:
    """Number of spanning trees by the Kirchhoff cofactor at vertex 0."""
    if _trivial(g):
        return 1
    if not g.is_connected():
        logger.warning("graph on %d vertices is disconnected; tau = 0", g.vertex_count)
        return 0
    tau = det_fraction_free(laplacians(g).G.minor(0))
    return int(tau)


def all_cofactors(g: Multigraph) -> list[int]:
    """Every principal cofactor of ``G``; all equal by the matrix-tree theorem."""
    if _trivial(g):
        return [1]
    G = laplacians(g).G
    return [int(det_fraction_free(G.minor(i))) for i in range(g.vertex_count)]


def tau_probabilistic(g: Multigraph) -> int:
    """Spanning trees from the characteristic polynomial of ``P``.

    Raises:
        InvariantBreach: If the assembled value is not an integer
    """
    if _trivial(g):
        return 1
    if not g.is_connected():
        logger.warning("graph on %d vertices is disconnected; tau = 0", g.vertex_count)
        return 0
    pair = laplacians(g)
    chi = char_poly(pair.P)
    # det(P - xI) = (0 - x) * prod(lambda_i - x) over the nonzero spectrum
    eigen_product = -chi.coefficient(1)
    ratio = Fraction(math.prod(pair.degrees), sum(pair.degrees))
    tau = abs(ratio * eigen_product)
    if tau.denominator != 1:
        raise InvariantBreach(f"probabilistic tree count {tau} is not an integer")
    return int(tau)
