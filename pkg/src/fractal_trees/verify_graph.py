from __future__ import annotations

import logging
from typing import Literal, Optional

from langgraph.graph import END, StateGraph

from .algebra.integers import int_to_decimal
from .config import get_settings
from .counting import tau_decimation
from .db import record_run
from .errors import DecimationInapplicable, VerificationMismatch
from .fractal_model import build_graph, degree_stats, vertex_count
from .matrix_tree import tau_cofactor, tau_probabilistic
from .state import SubstitutionSchema, VerifyState

logger = logging.getLogger(__name__)

METHODS = ("decimation", "cofactor", "probabilistic")


def build_verify_graph():
    g = StateGraph(VerifyState)

    def decimate_node(state: VerifyState) -> VerifyState:
        s, n = state["schema"], state["level"]
        state["vertex_count"] = vertex_count(s, n)
        try:
            count = tau_decimation(s, n)
        except DecimationInapplicable as exc:
            logger.warning("%s: %s; comparing the oracles only", s.name, exc)
            state["decimation"] = None
            return state
        state["decimation"] = count.exact_text() or count.describe()
        state["factored"] = {str(p): str(e) for p, e in count.factored.exponents}
        return state

    def build_node(state: VerifyState) -> VerifyState:
        state["graph"] = build_graph(state["schema"], state["level"])
        return state

    def cofactor_node(state: VerifyState) -> VerifyState:
        state["cofactor"] = int_to_decimal(tau_cofactor(state["graph"]))
        return state

    def probabilistic_node(state: VerifyState) -> VerifyState:
        state["probabilistic"] = int_to_decimal(tau_probabilistic(state["graph"]))
        return state

    def compare_node(state: VerifyState) -> VerifyState:
        values = {m: state.get(m) for m in METHODS if state.get(m) is not None}
        state["agree"] = len(set(values.values())) <= 1
        state["mismatch"] = None if state["agree"] else ", ".join(f"{m}={v}" for m, v in values.items())
        state["skipped"] = [m for m in METHODS if state.get(m) is None]
        state["graph"] = None
        return state

    def persist_node(state: VerifyState) -> VerifyState:
        s = state["schema"]
        state["run_id"] = record_run(
            schema_name=s.name,
            level=state["level"],
            method="verify",
            factored=state.get("factored", {}),
            agree=state["agree"],
            detail=state.get("mismatch") or "",
        )
        return state

    def route_oracles(state: VerifyState) -> Literal["build", "compare"]:
        if state["vertex_count"] > state["oracle_cap"]:
            return "compare"
        return "build"

    def route_probabilistic(state: VerifyState) -> Literal["oracle_probabilistic", "compare"]:
        if state["vertex_count"] > state["probabilistic_cap"]:
            return "compare"
        return "oracle_probabilistic"

    def route_persist(state: VerifyState) -> Literal["persist", "end"]:
        return "persist" if state.get("record") else "end"

    g.add_node("decimate", decimate_node)
    g.add_node("build", build_node)
    g.add_node("oracle_cofactor", cofactor_node)
    g.add_node("oracle_probabilistic", probabilistic_node)
    g.add_node("compare", compare_node)
    g.add_node("persist", persist_node)

    g.set_entry_point("decimate")
    g.add_conditional_edges("decimate", route_oracles, {"build": "build", "compare": "compare"})
    g.add_edge("build", "oracle_cofactor")
    g.add_conditional_edges(
        "oracle_cofactor", route_probabilistic, {"oracle_probabilistic": "oracle_probabilistic", "compare": "compare"}
    )
    g.add_edge("oracle_probabilistic", "compare")
    g.add_conditional_edges("compare", route_persist, {"persist": "persist", "end": END})
    g.add_edge("persist", END)

    return g.compile()


def run_verify(
    s: SubstitutionSchema,
    n: int,
    oracle_cap: Optional[int] = None,
    probabilistic_cap: Optional[int] = None,
    record: Optional[bool] = None,
) -> VerifyState:
    """Run the cross-check pipeline.

    Raises:
        VerificationMismatch: If any two methods disagree
    """
    settings = get_settings().with_overrides(
        oracle_vertex_cap=oracle_cap, probabilistic_vertex_cap=probabilistic_cap, record=record
    )
    app = build_verify_graph()
    state = app.invoke(
        {
            "schema": s,
            "level": n,
            "oracle_cap": settings.oracle_vertex_cap,
            "probabilistic_cap": settings.probabilistic_vertex_cap,
            "record": settings.record,
        }
    )
    if not state["agree"]:
        stats = degree_stats(s, n)
        raise VerificationMismatch(
            f"{s.name} level {n}: {state['mismatch']} (degree histogram {stats.histogram})"
        )
    return state
