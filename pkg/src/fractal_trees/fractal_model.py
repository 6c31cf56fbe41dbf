"""Approximating graphs of self-similar structures.

A :class:`~fractal_trees.state.SubstitutionSchema` fixes ``V_1`` and the cell
maps; ``V_n`` is ``m`` copies of ``V_{n-1}`` glued along boundary points.
Counts and degree statistics are available in closed recurrence form without
building the graph.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Optional

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher, numerical_edge_match
from networkx.utils import UnionFind
from sympy import factorint

from .algebra.integers import FactoredRational
from .config import get_settings
from .errors import GraphError, ResourceCapExceeded, SchemaError
from .schema_loader import builtin_schemas
from .state import CheckResult, GraphExport, SubstitutionSchema, ValidationReport

logger = logging.getLogger(__name__)

__all__ = [
    "DegreeStats",
    "Multigraph",
    "build_graph",
    "builtin_schemas",
    "degree_ratio",
    "degree_stats",
    "edge_count",
    "validate_schema",
    "vertex_count",
]


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Multigraph:
    """Loopless multigraph on ``0..vertex_count-1``.

    ``edges`` is the sorted tuple of ``(u, v, mult)`` with ``u < v``.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, int], ...]
    boundary: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise GraphError("a graph needs at least one vertex")
        for u, v, k in self.edges:
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"edge ({u}, {v}) out of range")
            if k < 1:
                raise GraphError(f"edge ({u}, {v}) has multiplicity {k}")
        if len(set(self.boundary)) != len(self.boundary):
            raise GraphError("boundary ids must be distinct")
        if any(not 0 <= b < self.vertex_count for b in self.boundary):
            raise GraphError("boundary id out of range")

    # --- construction -----------------------------------------------------
    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Iterable[Iterable[int]],
        boundary: Iterable[int] = (),
        drop_loops: bool = False,
    ) -> "Multigraph":
        """Sum parallel entries; ``edges`` items are ``(u, v)`` or ``(u, v, mult)``."""
        mult: Counter = Counter()
        for e in edges:
            u, v, *rest = e
            if u == v:
                if drop_loops:
                    continue
                raise GraphError(f"loop at vertex {u}")
            mult[_edge_key(u, v)] += rest[0] if rest else 1
        triples = tuple(sorted((u, v, k) for (u, v), k in mult.items() if k > 0))
        return cls(vertex_count, triples, tuple(boundary))

    @classmethod
    def complete(cls, n: int) -> "Multigraph":
        return cls.from_edges(n, itertools.combinations(range(n), 2), range(n))

    # --- views ------------------------------------------------------------
    @property
    def edge_count(self) -> int:
        """Number of edges counted with multiplicity."""
        return sum(k for _, _, k in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for u, v, k in self.edges:
            deg[u] += k
            deg[v] += k
        return deg

    def degree_histogram(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.degrees()).items()))

    def multiplicity(self, u: int, v: int) -> int:
        key = _edge_key(u, v)
        for a, b, k in self.edges:
            if (a, b) == key:
                return k
        return 0

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.vertex_count))
        g.add_edges_from((u, v, {"mult": k}) for u, v, k in self.edges)
        return g

    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())

    def is_tree(self) -> bool:
        return self.edge_count == self.vertex_count - 1 and self.is_connected()

    # --- operations used by the property suites ---------------------------
    def wedge(self, other: "Multigraph", at_self: int = 0, at_other: int = 0) -> "Multigraph":
        """One-point union identifying ``at_other`` of ``other`` with ``at_self``."""

        def relabel(v: int) -> int:
            if v == at_other:
                return at_self
            return self.vertex_count + (v if v < at_other else v - 1)

        edges = [(u, v, k) for u, v, k in self.edges]
        edges += [(relabel(u), relabel(v), k) for u, v, k in other.edges]
        return Multigraph.from_edges(self.vertex_count + other.vertex_count - 1, edges, self.boundary)

    def delete_edge(self, u: int, v: int) -> "Multigraph":
        """Remove one copy of ``{u, v}``."""
        key = _edge_key(u, v)
        if self.multiplicity(u, v) == 0:
            raise GraphError(f"no edge {key}")
        edges = [(a, b, k - 1 if (a, b) == key else k) for a, b, k in self.edges]
        return Multigraph(self.vertex_count, tuple(e for e in edges if e[2] > 0), self.boundary)

    def contract_edge(self, u: int, v: int) -> "Multigraph":
        """Merge ``v`` into ``u``; resulting loops are dropped."""
        if self.multiplicity(u, v) == 0:
            raise GraphError(f"no edge {_edge_key(u, v)}")
        keep, gone = min(u, v), max(u, v)

        def relabel(w: int) -> int:
            if w == gone:
                return keep
            return w - 1 if w > gone else w

        boundary = list(dict.fromkeys(relabel(b) for b in self.boundary))
        return Multigraph.from_edges(
            self.vertex_count - 1,
            ((relabel(a), relabel(b), k) for a, b, k in self.edges),
            boundary,
            drop_loops=True,
        )

    # --- export -----------------------------------------------------------
    def to_export(self, level: int) -> GraphExport:
        return GraphExport(
            vertex_count=self.vertex_count,
            boundary=list(self.boundary),
            edges=[[u, v, k] for u, v, k in self.edges],
            level=level,
        )

    def to_dot(self, name: str = "V") -> str:
        lines = [f"graph {name} {{"]
        for b in self.boundary:
            lines.append(f"  {b} [shape=doublecircle];")
        for u, v, k in self.edges:
            attr = f' [label="{k}"]' if k > 1 else ""
            lines.append(f"  {u} -- {v}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def v1_graph(s: SubstitutionSchema) -> Multigraph:
    try:
        return Multigraph.from_edges(s.v1.vertex_count, s.v1.edges, s.v1.boundary)
    except GraphError as exc:
        raise SchemaError(f"{s.name}: v1 is not a loopless multigraph: {exc}") from exc


# --- validation -------------------------------------------------------------

def _check_maps(s: SubstitutionSchema) -> None:
    n = s.v1.vertex_count
    for i, phi in enumerate(s.cell_maps):
        if any(not 0 <= w < n for w in phi):
            raise SchemaError(f"{s.name}: cell map {i} has an id outside 0..{n - 1}")
        if len(set(phi)) != len(phi):
            raise SchemaError(f"{s.name}: cell map {i} is not injective")


def _check_boundary_glued(s: SubstitutionSchema) -> None:
    images = {w for phi in s.cell_maps for w in phi}
    loose = [b for b in s.v1.boundary if b not in images]
    if loose:
        raise SchemaError(f"{s.name}: boundary vertices {loose} lie in no cell, so V_n has no boundary there")


def _cell_cover(s: SubstitutionSchema, g: Multigraph) -> CheckResult:
    glued: Counter = Counter()
    for phi in s.cell_maps:
        for a, b in itertools.combinations(phi, 2):
            glued[_edge_key(a, b)] += 1
    actual = Counter({(u, v): k for u, v, k in g.edges})
    if glued == actual:
        return CheckResult(name="cell_cover", passed=True)
    diff = sorted(set(glued.items()) ^ set(actual.items()))
    return CheckResult(name="cell_cover", passed=False, detail=f"edge multisets differ at {diff[:4]}")


def _fixed_points(s: SubstitutionSchema) -> CheckResult:
    missing = [x for x, cells in enumerate(s.fixed_points) if not cells]
    if missing:
        return CheckResult(
            name="fixed_points", passed=False, detail=f"no cell fixes boundary positions {missing}"
        )
    return CheckResult(name="fixed_points", passed=True)


def _automorphisms(g: nx.Graph, boundary: list[int], sigma: tuple[int, ...]) -> Iterator[dict]:
    """Automorphisms of ``g`` sending ``boundary[x]`` to ``boundary[sigma[x]]``."""
    src, dst = g.copy(), g.copy()
    nx.set_node_attributes(src, -1, "label")
    nx.set_node_attributes(dst, -1, "label")
    for x, b in enumerate(boundary):
        src.nodes[b]["label"] = x
        dst.nodes[boundary[sigma[x]]]["label"] = x
    matcher = GraphMatcher(
        src,
        dst,
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=numerical_edge_match("mult", 1),
    )
    return matcher.isomorphisms_iter()


def _full_symmetry(s: SubstitutionSchema, g: Multigraph) -> CheckResult:
    nxg = g.to_networkx()
    cells = {frozenset(phi) for phi in s.cell_maps}
    for sigma in itertools.permutations(range(s.boundary_size)):
        if not any(
            {frozenset(auto[w] for w in c) for c in cells} == cells
            for auto in _automorphisms(nxg, list(s.v1.boundary), sigma)
        ):
            return CheckResult(
                name="full_symmetry",
                passed=False,
                detail=f"boundary permutation {list(sigma)} extends to no cell-preserving automorphism",
            )
    return CheckResult(name="full_symmetry", passed=True)


def _boundary_independent(s: SubstitutionSchema, g: Multigraph) -> CheckResult:
    boundary = set(s.v1.boundary)
    joined = [(u, v) for u, v, _ in g.edges if u in boundary and v in boundary]
    if joined:
        return CheckResult(name="boundary_independent", passed=False, detail=f"boundary edges {joined}")
    return CheckResult(name="boundary_independent", passed=True)


def validate_schema(s: SubstitutionSchema) -> ValidationReport:
    """Structural checks; any failure makes the schema oracle-only.

    Raises:
        SchemaError: On malformed cell maps or an invalid ``v1`` graph
    """
    _check_maps(s)
    g = v1_graph(s)
    checks = [
        _cell_cover(s, g),
        _fixed_points(s),
        CheckResult(name="connected", passed=g.is_connected()),
        _full_symmetry(s, g),
        _boundary_independent(s, g),
    ]
    report = ValidationReport(schema_name=s.name, checks=checks)
    for c in checks:
        if not c.passed:
            logger.info("%s: check %s failed: %s", s.name, c.name, c.detail)
    return report


# --- counts -----------------------------------------------------------------

def junction_excess(s: SubstitutionSchema) -> int:
    """``J = m * N0 - |images of boundary points|``."""
    images = {w for phi in s.cell_maps for w in phi}
    return s.num_cells * s.boundary_size - len(images)


def vertex_count(s: SubstitutionSchema, n: int) -> int:
    if n < 0:
        raise ValueError("level must be non-negative")
    j = junction_excess(s)
    count = s.boundary_size
    for _ in range(n):
        count = s.num_cells * count - j
    return count


def edge_count(s: SubstitutionSchema, n: int) -> int:
    """Edges of ``V_n`` with multiplicity."""
    if n < 0:
        raise ValueError("level must be non-negative")
    return s.num_cells**n * math.comb(s.boundary_size, 2)


@dataclass(frozen=True)
class DegreeStats:
    histogram: Dict[int, int]
    boundary_degrees: tuple[int, ...]
    vertex_count: int
    edge_count: int


def degree_stats(s: SubstitutionSchema, n: int) -> DegreeStats:
    """Degree census of ``V_n`` by a level recurrence (no graph is built)."""
    if n < 0:
        raise ValueError("level must be non-negative")
    m, n0 = s.num_cells, s.boundary_size
    interior: Counter = Counter()
    bdeg = [n0 - 1] * n0
    boundary_pos = {w: x for x, w in enumerate(s.v1.boundary)}
    for _ in range(n):
        junction: Counter = Counter()
        for phi in s.cell_maps:
            for x, w in enumerate(phi):
                junction[w] += bdeg[x]
        interior = Counter({d: m * c for d, c in interior.items()})
        new_bdeg = list(bdeg)
        for w, d in junction.items():
            if w in boundary_pos:
                new_bdeg[boundary_pos[w]] = d
            else:
                interior[d] += 1
        bdeg = new_bdeg
    hist = Counter(interior)
    for d in bdeg:
        hist[d] += 1
    return DegreeStats(
        histogram=dict(sorted(hist.items())),
        boundary_degrees=tuple(bdeg),
        vertex_count=vertex_count(s, n),
        edge_count=edge_count(s, n),
    )


def degree_ratio(s: SubstitutionSchema, n: int) -> FactoredRational:
    """``prod(d_j) / sum(d_j)`` over the vertices of ``V_n``, factored."""
    stats = degree_stats(s, n)
    exps: Counter = Counter()
    for d, count in stats.histogram.items():
        for p, e in factorint(d).items():
            exps[int(p)] += int(e) * count
    # sum of degrees = 2 * C(N0, 2) * m^n
    for p, e in factorint(2 * math.comb(s.boundary_size, 2)).items():
        exps[int(p)] -= int(e)
    for p, e in factorint(s.num_cells).items():
        exps[int(p)] -= int(e) * n
    return FactoredRational.of(exps)


# --- construction -----------------------------------------------------------

def _glue(s: SubstitutionSchema, prev: Multigraph) -> Multigraph:
    m = s.num_cells
    uf = UnionFind()
    for i, phi in enumerate(s.cell_maps):
        for x, w in enumerate(phi):
            uf.union(("v1", w), (i, prev.boundary[x]))

    prev_boundary = set(prev.boundary)
    ids: dict = {}
    local: list[list[int]] = []
    next_id = 0
    for i in range(m):
        row = []
        for v in range(prev.vertex_count):
            key = uf[(i, v)] if v in prev_boundary else (i, v)
            if key not in ids:
                ids[key] = next_id
                next_id += 1
            row.append(ids[key])
        local.append(row)

    mult: Counter = Counter()
    for row in local:
        for u, v, k in prev.edges:
            mult[_edge_key(row[u], row[v])] += k
    boundary = tuple(ids[uf[("v1", w)]] for w in s.v1.boundary)
    edges = tuple(sorted((u, v, k) for (u, v), k in mult.items()))
    return Multigraph(next_id, edges, boundary)


def build_graph(s: SubstitutionSchema, n: int, cap: Optional[int] = None) -> Multigraph:
    """Construct ``V_n``; vertex ids follow the first ``(cell, inner id)`` member of each class.

    Raises:
        ResourceCapExceeded: If ``|V_n|`` is above the build cap
        SchemaError: On malformed cell maps or a boundary vertex outside every cell
    """
    if n < 0:
        raise ValueError("level must be non-negative")
    cap = get_settings().build_vertex_cap if cap is None else cap
    size = vertex_count(s, n)
    if size > cap:
        raise ResourceCapExceeded(
            f"|V_{n}| = {size} exceeds the build cap {cap}; use the decimation path"
        )
    _check_maps(s)
    _check_boundary_glued(s)
    g = Multigraph.complete(s.boundary_size)
    for level in range(1, n + 1):
        g = _glue(s, g)
        logger.debug("%s: built level %d with %d vertices", s.name, level, g.vertex_count)
    return g
