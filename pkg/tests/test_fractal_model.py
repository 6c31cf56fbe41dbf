"""Schema loading, validation and construction of the approximating graphs."""
import json
import math
from collections import Counter

import networkx as nx
import pytest

from fractal_trees.errors import GraphError, ResourceCapExceeded, SchemaError
from fractal_trees.fractal_model import (
    Multigraph,
    build_graph,
    degree_ratio,
    degree_stats,
    edge_count,
    junction_excess,
    v1_graph,
    validate_schema,
    vertex_count,
)
from fractal_trees.schema_loader import load_schema, resolve_schema
from fractal_trees.state import GraphExport, SubstitutionSchema

VERTEX_FORMULAS = {
    "sierpinski": lambda n: (3 ** (n + 1) + 3) // 2,
    "npcf_gasket": lambda n: (4 * 6**n + 11) // 5,
    "diamond": lambda n: (4 + 2 * 4**n) // 3,
    "hexagasket": lambda n: (6 + 9 * 6**n) // 5,
}


def _schema(name, vertex_count, boundary, edges, cell_maps):
    return SubstitutionSchema(
        name=name,
        num_cells=len(cell_maps),
        boundary_size=len(boundary),
        v1={"vertex_count": vertex_count, "boundary": boundary, "edges": edges},
        cell_maps=cell_maps,
    )


@pytest.fixture
def triangle_on_edge():
    """Two series cells plus one cell straight across the boundary."""
    return _schema("triangle_on_edge", 3, [0, 1], [[0, 2, 1], [1, 2, 1], [0, 1, 1]], [[0, 2], [2, 1], [0, 1]])


# -- loading -----------------------------------------------------------------

def test_builtin_catalog(schemas):
    assert list(schemas) == ["diamond", "hexagasket", "npcf_gasket", "sierpinski"]


def test_load_schema_from_file(tmp_path, sierpinski):
    path = tmp_path / "sg.json"
    path.write_text(sierpinski.model_dump_json(), encoding="utf-8")
    assert load_schema(path) == sierpinski
    assert resolve_schema(str(path)) == sierpinski


def test_load_schema_errors(tmp_path):
    with pytest.raises(SchemaError):
        load_schema(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "x", "num_cells": 2, "boundary_size": 2,
                               "v1": {"vertex_count": 2, "boundary": [0, 1], "edges": [[0, 1, 1]]},
                               "cell_maps": [[0, 1]]}), encoding="utf-8")
    with pytest.raises(SchemaError):
        load_schema(bad)
    text = tmp_path / "schema.txt"
    text.write_text("{}", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_schema(text)


def test_unreadable_schema_files(tmp_path):
    binary = tmp_path / "binary.json"
    binary.write_bytes(b"\xff\xfe{}")
    with pytest.raises(SchemaError, match="UTF-8"):
        load_schema(binary)
    folder = tmp_path / "folder.json"
    folder.mkdir()
    with pytest.raises(SchemaError, match="cannot read"):
        load_schema(folder)


def test_resolve_unknown_name():
    with pytest.raises(SchemaError):
        resolve_schema("no_such_fractal")


# -- validation ----------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(VERTEX_FORMULAS))
def test_builtins_are_fully_symmetric(schemas, name):
    report = validate_schema(schemas[name])
    assert report.ok, [c for c in report.checks if not c.passed]
    assert report.status == "fully symmetric"


def test_boundary_edge_makes_schema_oracle_only(triangle_on_edge):
    report = validate_schema(triangle_on_edge)
    assert not report.passed("boundary_independent")
    assert report.passed("full_symmetry")
    assert report.status == "oracle-only"


def test_missing_fixed_point():
    s = _schema("no_fixed", 3, [0, 1], [[0, 2, 1], [1, 2, 1]], [[2, 0], [2, 1]])
    report = validate_schema(s)
    assert not report.passed("fixed_points")


def test_asymmetric_schema_fails_symmetry():
    # path 0 - 2 - 3 - 1 with a pendant cell hanging off vertex 2 only
    s = _schema(
        "lopsided", 5, [0, 1],
        [[0, 2, 1], [2, 3, 1], [1, 3, 1], [2, 4, 1]],
        [[0, 2], [2, 3], [3, 1], [2, 4]],
    )
    report = validate_schema(s)
    assert not report.passed("full_symmetry")


def test_cell_cover_mismatch():
    s = _schema("extra_edge", 4, [0, 1], [[0, 2, 1], [1, 2, 1], [0, 3, 1], [1, 3, 1], [2, 3, 1]],
                [[0, 2], [2, 1], [0, 3], [3, 1]])
    assert not validate_schema(s).passed("cell_cover")


def test_malformed_cell_maps():
    with pytest.raises(SchemaError):
        validate_schema(_schema("oob", 3, [0, 1], [[0, 2, 1], [1, 2, 1]], [[0, 2], [2, 7]]))
    with pytest.raises(SchemaError):
        validate_schema(_schema("dup", 3, [0, 1], [[0, 2, 1], [1, 2, 1]], [[0, 2], [2, 2]]))


def test_v1_with_loop_is_rejected():
    with pytest.raises(SchemaError):
        v1_graph(_schema("loop", 3, [0, 1], [[0, 2, 1], [2, 2, 1]], [[0, 2], [2, 1]]))


def test_boundary_outside_every_cell_cannot_be_built():
    # boundary vertex 3 hangs off vertex 1 but no cell map reaches it
    s = _schema("loose_end", 4, [0, 3], [[0, 2, 1], [1, 2, 1], [1, 3, 1]], [[0, 2], [2, 1]])
    with pytest.raises(SchemaError, match="lie in no cell"):
        build_graph(s, 1)


# -- counts ----------------------------------------------------------------------

@pytest.mark.parametrize("name", sorted(VERTEX_FORMULAS))
@pytest.mark.parametrize("n", range(13))
def test_vertex_count_closed_forms(schemas, name, n):
    assert vertex_count(schemas[name], n) == VERTEX_FORMULAS[name](n)


def test_junction_excess(schemas):
    assert junction_excess(schemas["sierpinski"]) == 3
    assert junction_excess(schemas["diamond"]) == 4


@pytest.mark.parametrize("name", sorted(VERTEX_FORMULAS))
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_built_graph_matches_counts(schemas, name, n):
    s = schemas[name]
    g = build_graph(s, n)
    assert g.vertex_count == vertex_count(s, n)
    assert g.edge_count == edge_count(s, n) == s.num_cells**n * math.comb(s.boundary_size, 2)
    assert g.is_connected()
    stats = degree_stats(s, n)
    assert stats.histogram == g.degree_histogram()
    assert stats.boundary_degrees == tuple(g.degrees()[b] for b in g.boundary)


def test_first_level_is_isomorphic_to_v1(schemas):
    for s in schemas.values():
        built = build_graph(s, 1).to_networkx()
        given = v1_graph(s).to_networkx()
        assert nx.is_isomorphic(built, given, edge_match=lambda a, b: a["mult"] == b["mult"])


def test_sierpinski_degree_census(sierpinski):
    for n in range(1, 8):
        stats = degree_stats(sierpinski, n)
        assert stats.histogram == {2: 3, 4: (3 ** (n + 1) - 3) // 2}
        assert stats.boundary_degrees == (2, 2, 2)


def _npcf_census(n):
    census = Counter({2 ** (n + 1): 3})
    for k in range(1, n + 1):
        census[3 * 2 ** (n - k + 2)] += 6 ** (k - 1)
        census[2 ** (n - k + 2)] += 3 * 6 ** (k - 1)
    return dict(census)


def _diamond_census(n):
    census = Counter({2**n: 4})
    for k in range(1, n):
        census[2**k] += 2 * 4 ** (n - k)
    return dict(census)


def _hexagasket_census(n):
    census = {2: (12 + 3 * 6**n) // 5, 4: 6 * (6**n - 1) // 5}
    return {d: c for d, c in census.items() if c}


@pytest.mark.parametrize("n", range(6))
def test_npcf_degree_census(npcf, n):
    assert degree_stats(npcf, n).histogram == _npcf_census(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_diamond_degree_census(diamond, n):
    assert degree_stats(diamond, n).histogram == _diamond_census(n)


@pytest.mark.parametrize("n", range(7))
def test_hexagasket_degree_census(hexagasket, n):
    assert degree_stats(hexagasket, n).histogram == _hexagasket_census(n)


DEGREE_RATIOS = {
    "sierpinski": lambda n: {2: 3 ** (n + 1) - 1, 3: -(n + 1)},
    "hexagasket": lambda n: {2: 3 * 6**n - n - 1, 3: -(n + 1)},
    "diamond": lambda n: {2: (2 * 4 ** (n + 1) - 6 * n - 17) // 9},
    "npcf_gasket": lambda n: {2: (44 * 6**n + 30 * n + 6) // 25, 3: (6**n - 5 * n - 6) // 5},
}


@pytest.mark.parametrize("name", sorted(DEGREE_RATIOS))
@pytest.mark.parametrize("n", range(1, 13))
def test_degree_ratio_closed_forms(schemas, name, n):
    expected = {p: e for p, e in DEGREE_RATIOS[name](n).items() if e}
    assert degree_ratio(schemas[name], n).as_dict() == expected


@pytest.mark.parametrize(
    "name, n",
    [(name, n) for name in ("sierpinski", "diamond") for n in range(4, 7)]
    + [("npcf_gasket", 4), ("hexagasket", 4)]
    + [pytest.param(name, n, marks=pytest.mark.slow) for name in ("npcf_gasket", "hexagasket") for n in (5, 6)],
)
def test_degree_census_matches_built_graph(schemas, name, n):
    s = schemas[name]
    g = build_graph(s, n)
    stats = degree_stats(s, n)
    assert stats.histogram == g.degree_histogram()
    assert stats.boundary_degrees == tuple(g.degrees()[b] for b in g.boundary)
    assert stats.vertex_count == g.vertex_count


def test_degree_census_at_depth_is_cheap(schemas):
    stats = degree_stats(schemas["hexagasket"], 40)
    assert sum(stats.histogram.values()) == vertex_count(schemas["hexagasket"], 40)


def test_degree_ratio_of_base_triangle(sierpinski):
    # K_3: prod(d) / sum(d) = 8 / 6
    assert degree_ratio(sierpinski, 0).as_dict() == {2: 2, 3: -1}


def test_build_cap(sierpinski):
    with pytest.raises(ResourceCapExceeded):
        build_graph(sierpinski, 10, cap=1000)


# -- multigraphs -------------------------------------------------------------------

def test_from_edges_merges_parallel_edges():
    g = Multigraph.from_edges(3, [(0, 1), (1, 0), (1, 2, 3)])
    assert g.edges == ((0, 1, 2), (1, 2, 3))
    assert g.edge_count == 5
    assert g.degrees() == [2, 5, 3]
    assert g.multiplicity(2, 1) == 3


def test_loops_and_bad_ids_are_rejected():
    with pytest.raises(GraphError):
        Multigraph.from_edges(2, [(1, 1)])
    with pytest.raises(GraphError):
        Multigraph.from_edges(2, [(0, 5)])
    assert Multigraph.from_edges(2, [(0, 1), (1, 1)], drop_loops=True).edge_count == 1


def test_export_formats(diamond):
    g = build_graph(diamond, 1)
    export = g.to_export(1)
    assert GraphExport.model_validate_json(export.model_dump_json()) == export
    assert export.level == 1
    dot = g.to_dot("diamond_1")
    assert dot.startswith("graph diamond_1 {")
    assert dot.count("--") == len(g.edges)
    assert dot.count("doublecircle") == 2
