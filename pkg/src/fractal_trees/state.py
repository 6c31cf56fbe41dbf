"""
Data models for the fractal-trees pipeline.

The pydantic models mirror the on-disk JSON formats (schema files, graph
exports, spectrum dumps, count outputs) field for field, so that
``model_validate_json`` / ``model_dump_json`` are the readers and writers.
``VerifyState`` is the state threaded through the verification graph.
"""
from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional, TypedDict

from pydantic import BaseModel, ConfigDict, Field, model_validator


class V1Graph(BaseModel):
    """
    A loopless multigraph in file form.

    Vertex ids are 0-based; ``edges`` holds ``[u, v, multiplicity]`` triples.
    The ``boundary`` list is ordered: position ``x`` is boundary point ``x``.
    """
    model_config = ConfigDict(frozen=True)

    vertex_count: int = Field(ge=1)
    boundary: List[int]
    edges: List[List[int]]

    @model_validator(mode="after")
    def _edge_triples(self) -> "V1Graph":
        for e in self.edges:
            if len(e) != 3:
                raise ValueError(f"edge {e} must be [u, v, mult]")
        return self


class SubstitutionSchema(BaseModel):
    """
    Declarative description of a self-similar structure.

    ``cell_maps[i][x]`` is the ``V_1`` vertex that boundary point ``x`` of
    cell ``i`` is glued to. Everything else (``V_n``, spectra, tree counts)
    is derived from these fields.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    num_cells: int = Field(ge=2)
    boundary_size: int = Field(ge=2)
    v1: V1Graph
    cell_maps: List[List[int]]

    @model_validator(mode="after")
    def _shapes(self) -> "SubstitutionSchema":
        if len(self.cell_maps) != self.num_cells:
            raise ValueError(f"expected {self.num_cells} cell maps, got {len(self.cell_maps)}")
        for i, phi in enumerate(self.cell_maps):
            if len(phi) != self.boundary_size:
                raise ValueError(f"cell map {i} has {len(phi)} entries, expected {self.boundary_size}")
        if len(self.v1.boundary) != self.boundary_size:
            raise ValueError("v1.boundary length must equal boundary_size")
        return self

    @property
    def fixed_points(self) -> List[List[int]]:
        """For each boundary position ``x``, the cells with ``phi_i(x)`` on that boundary vertex."""
        return [
            [i for i, phi in enumerate(self.cell_maps) if phi[x] == b]
            for x, b in enumerate(self.v1.boundary)
        ]


class GraphExport(V1Graph):
    level: int = Field(ge=0)


class SpectralClassDump(BaseModel):
    minpoly: List[str]   # ascending coefficients as "num/den"
    depth: int
    origin: Literal["A", "B", "zero"]
    mult: str


class SpectrumDump(BaseModel):
    level: int
    classes: List[SpectralClassDump] = Field(default_factory=list)


class CountOutput(BaseModel):
    schema_: str = Field(alias="schema")
    level: int
    method: Literal["decimation", "cofactor", "probabilistic"]
    factored: Dict[str, str] = Field(default_factory=dict)
    log10: float
    digits: int
    exact: Optional[str] = None

    model_config = ConfigDict(populate_by_name=True)


class CheckResult(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class ValidationReport(BaseModel):
    schema_name: str
    checks: List[CheckResult] = Field(default_factory=list)

    def passed(self, name: str) -> bool:
        return any(c.name == name and c.passed for c in self.checks)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def decimation_eligible(self) -> bool:
        return self.ok

    @property
    def status(self) -> str:
        return "fully symmetric" if self.ok else "oracle-only"


class VerifyState(TypedDict, total=False):
    # inputs
    schema: SubstitutionSchema
    level: int
    oracle_cap: int
    probabilistic_cap: int
    record: bool

    # per-method results (exact integers as decimal strings)
    decimation: Optional[str]
    factored: Dict[str, str]
    cofactor: Optional[str]
    probabilistic: Optional[str]
    vertex_count: int

    # graph built once for both oracles
    graph: Any

    skipped: List[str]
    agree: bool
    mismatch: Optional[str]
    run_id: Optional[int]
