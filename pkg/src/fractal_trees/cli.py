"""Command-line entry point: ``fractal-trees`` / ``python -m fractal_trees``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from .algebra.integers import decimal_to_int
from .config import Settings, get_settings
from .counting import TreeCount, bounds_check, complexity_constant, tau_decimation
from .db import list_runs, print_history, record_run
from .decimation import spectrum, spectrum_dump
from .errors import FractalTreesError, ResourceCapExceeded
from .fractal_model import build_graph, validate_schema, vertex_count
from .matrix_tree import tau_cofactor, tau_probabilistic
from .schema_loader import builtin_schemas, resolve_schema
from .state import SubstitutionSchema
from .verify_graph import run_verify

logger = logging.getLogger("fractal_trees")

BANNER = "=" * 50
USAGE_EXIT_CODE = 64


class _Parser(argparse.ArgumentParser):
    """Exits with ``USAGE_EXIT_CODE`` on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def _level(raw: str) -> int:
    n = int(raw)
    if n < 0:
        raise argparse.ArgumentTypeError("level must be >= 0")
    return n


def _banner(title: str) -> None:
    print("\n" + BANNER)
    print(title)
    print(BANNER)


def _emit_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _settings(args: argparse.Namespace) -> Settings:
    return get_settings().with_overrides(
        oracle_vertex_cap=args.oracle_cap,
        probabilistic_vertex_cap=args.probabilistic_cap,
        digit_cap=args.digit_cap,
        record=True if args.record else None,
    )


# --- commands -----------------------------------------------------------------

def cmd_list(args: argparse.Namespace) -> int:
    rows = []
    for name, s in builtin_schemas().items():
        report = validate_schema(s)
        rows.append(
            {
                "name": name,
                "num_cells": s.num_cells,
                "boundary_size": s.boundary_size,
                "v1_vertices": s.v1.vertex_count,
                "status": report.status,
            }
        )
    if args.json:
        _emit_json(rows)
        return 0
    print(f"{'Schema':<16} {'m':<4} {'N0':<4} {'|V_1|':<7} {'Status'}")
    print("-" * 50)
    for r in rows:
        print(f"{r['name']:<16} {r['num_cells']:<4} {r['boundary_size']:<4} {r['v1_vertices']:<7} {r['status']}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    report = validate_schema(s)
    if args.json:
        _emit_json(report.model_dump() | {"ok": report.ok, "status": report.status})
    else:
        _banner(f"VALIDATE {s.name}")
        for check in report.checks:
            mark = "ok  " if check.passed else "FAIL"
            print(f"[{mark}] {check.name:<22} {check.detail}")
        print(f"\nstatus: {report.status}")
    return 0 if report.ok else 1


def cmd_graph(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    g = build_graph(s, args.n)
    if args.format == "dot":
        print(g.to_dot(f"{s.name}_{args.n}"), end="")
    else:
        print(g.to_export(args.n).model_dump_json(indent=2))
    return 0


def _oracle_count(s: SubstitutionSchema, n: int, method: str, settings: Settings) -> TreeCount:
    cap = settings.oracle_vertex_cap if method == "cofactor" else settings.probabilistic_vertex_cap
    size = vertex_count(s, n)
    if size > cap:
        raise ResourceCapExceeded(f"|V_{n}| = {size} exceeds the {method} cap {cap}")
    g = build_graph(s, n)
    value = tau_cofactor(g) if method == "cofactor" else tau_probabilistic(g)
    return TreeCount.from_int(s.name, n, method, value)


def cmd_count(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    settings = _settings(args)
    n = args.n
    checked: Optional[dict] = None

    if args.method in ("cofactor", "probabilistic"):
        tc = _oracle_count(s, n, args.method, settings)
    elif args.method == "all":
        checked = run_verify(s, n, settings.oracle_vertex_cap, settings.probabilistic_vertex_cap, False)
        if checked.get("decimation") is not None:
            tc = tau_decimation(s, n, settings.digit_cap)
        elif checked.get("cofactor") is not None:
            tc = TreeCount.from_int(s.name, n, "cofactor", decimal_to_int(checked["cofactor"]))
        else:
            raise ResourceCapExceeded(f"no method could count {s.name} at level {n}")
    else:
        tc = tau_decimation(s, n, settings.digit_cap)
        if vertex_count(s, n) <= settings.oracle_vertex_cap:
            checked = run_verify(s, n, settings.oracle_vertex_cap, settings.probabilistic_vertex_cap, False)
        bounds_check(s, n, tc)

    if args.exact and not tc.exact_available:
        raise ResourceCapExceeded(
            f"tau has {tc.factored.digits()} digits, above the digit cap {settings.digit_cap}"
        )

    if settings.record:
        record_run(
            schema_name=s.name,
            level=n,
            method=tc.method,
            factored={str(p): str(e) for p, e in tc.factored.exponents},
            digits=tc.factored.digits(),
            log10=tc.factored.log10(),
            agree=None if checked is None else checked["agree"],
        )

    if args.json:
        print(tc.to_output().model_dump_json(by_alias=True, indent=2))
        return 0
    print(tc.describe())
    if checked is not None:
        compared = [m for m in ("decimation", "cofactor", "probabilistic") if m not in checked["skipped"]]
        if len(compared) > 1:
            print(f"{', '.join(compared)} agree")
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    ms = spectrum(s, args.n)
    if args.json:
        print(spectrum_dump(ms, args.max_degree).model_dump_json(indent=2))
        return 0
    _banner(f"SPECTRUM of P_{args.n} for {s.name} ({ms.total} eigenvalues)")
    print(f"{'origin':<7} {'depth':<6} {'degree':<10} {'mult':<12} {'base class'}")
    print("-" * 50)
    for cls, mult in ms.entries:
        print(f"{cls.origin:<7} {cls.depth:<6} {cls.degree:<10} {mult:<12} {cls.base.as_expr()}")
    return 0


def cmd_constant(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    est = complexity_constant(s, n_max=args.n_max)
    if args.json:
        _emit_json(
            {
                "schema": s.name,
                "numeric": est.numeric,
                "coefficients": None
                if est.per_prime_coefficients is None
                else {str(p): str(q) for p, q in sorted(est.per_prime_coefficients.items())},
                "n_used": est.n_used,
                "residual": est.residual,
            }
        )
        return 0
    print(est.describe())
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    s = resolve_schema(args.schema)
    settings = _settings(args)
    report = run_verify(
        s, args.n, settings.oracle_vertex_cap, settings.probabilistic_vertex_cap, settings.record
    )
    if args.json:
        _emit_json(
            {
                "schema": s.name,
                "level": args.n,
                "vertex_count": report["vertex_count"],
                "decimation": report.get("decimation"),
                "cofactor": report.get("cofactor"),
                "probabilistic": report.get("probabilistic"),
                "skipped": report["skipped"],
                "agree": report["agree"],
                "run_id": report.get("run_id"),
            }
        )
        return 0
    _banner(f"VERIFY {s.name} level {args.n} (|V_{args.n}| = {report['vertex_count']})")
    for method in ("decimation", "cofactor", "probabilistic"):
        value = report.get(method)
        print(f"{method:<15} {'skipped' if value is None else value}")
    print("all computed methods agree")
    return 0


def cmd_history(args: argparse.Namespace) -> int:
    if not args.json:
        print_history(args.schema, args.limit)
        return 0
    _emit_json(
        [
            {
                "id": r.id,
                "schema": r.schema_name,
                "level": r.level,
                "method": r.method,
                "factored": json.loads(r.factored_json),
                "digits": r.digits,
                "agree": r.agree,
                "created_at": r.created_at.isoformat() if r.created_at else None,
            }
            for r in list_runs(args.schema, args.limit)
        ]
    )
    return 0


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")
    common.add_argument("--oracle-cap", type=int, default=None, help="vertex cap for the cofactor oracle")
    common.add_argument("--probabilistic-cap", type=int, default=None, help="vertex cap for the charpoly oracle")
    common.add_argument("--digit-cap", type=int, default=None, help="largest tau expanded to an integer")
    common.add_argument("--record", action="store_true", help="store the result in the run ledger")

    parser = _Parser(
        prog="fractal-trees",
        description="Exact spanning-tree counts on self-similar graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", parents=[common], help="built-in schemas")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("validate", parents=[common], help="check a schema's hypotheses")
    p.add_argument("schema")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", parents=[common], help="export V_n")
    p.add_argument("schema")
    p.add_argument("-n", type=_level, required=True)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("count", parents=[common], help="count spanning trees of V_n")
    p.add_argument("schema")
    p.add_argument("-n", type=_level, required=True)
    p.add_argument("--method", choices=("decimation", "cofactor", "probabilistic", "all"), default="decimation")
    p.add_argument("--exact", action="store_true", help="fail unless the full integer fits the digit cap")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("spectrum", parents=[common], help="spectrum of P_n by decimation")
    p.add_argument("schema")
    p.add_argument("-n", type=_level, required=True)
    p.add_argument("--max-degree", type=int, default=4096, help="largest class expanded in the JSON dump")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("constant", parents=[common], help="asymptotic complexity constant")
    p.add_argument("schema")
    p.add_argument("--n-max", type=_level, default=30)
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("verify", parents=[common], help="cross-check all counting methods")
    p.add_argument("schema")
    p.add_argument("-n", type=_level, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("history", parents=[common], help="recorded runs")
    p.add_argument("--schema", default=None)
    p.add_argument("--limit", type=int, default=50)
    p.set_defaults(func=cmd_history)

    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    if args.quiet:
        level = logging.ERROR
    elif args.verbose >= 2:
        level = logging.DEBUG
    elif args.verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return args.func(args)
    except FractalTreesError as exc:
        logger.debug("command failed", exc_info=True)
        if args.json:
            _emit_json({"error": exc.code, "detail": str(exc)})
        else:
            print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
