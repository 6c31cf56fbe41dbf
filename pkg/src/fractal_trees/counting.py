"""Spanning-tree counts assembled from the decimated spectrum.

``tau(V_n) = |prod(d)/sum(d) * prod over classes of (root product)^mult|``
where a class ``R^{-k}(b)`` has root product ``N(b) * s^(g (d^k - 1)/(d - 1))``
with ``s = -Q(0)/P_d``. Everything is carried in factored form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

from .algebra.integers import FactoredInteger, FactoredRational, int_to_decimal
from .algebra.polynomials import RationalFunction, UniPoly, is_irreducible
from .config import get_settings
from .decimation import ZERO_CLASS, engine_for
from .errors import AlgebraError, InvariantBreach
from .fractal_model import degree_ratio, v1_graph, vertex_count
from .state import CountOutput, SubstitutionSchema

logger = logging.getLogger(__name__)


def geometric_count(d: int, k: int) -> int:
    """``1 + d + ... + d^(k-1)``."""
    return k if d == 1 else (d**k - 1) // (d - 1)


def preiterate_product(R: RationalFunction, alpha_class: UniPoly, k: int) -> Fraction:
    """Product of all roots of ``R^{-k}`` over the class.

    Raises:
        AlgebraError: If ``R(0) != 0``, ``deg P <= deg Q`` or the class is reducible
    """
    if R.numerator.degree <= R.denominator.degree:
        raise AlgebraError("R needs deg P > deg Q")
    if R.numerator.constant_term != 0 or R.denominator.constant_term == 0:
        raise AlgebraError("R must vanish at 0")
    if not is_irreducible(alpha_class):
        raise AlgebraError(f"{alpha_class} is not irreducible")
    decay = -R.denominator.constant_term / R.numerator.leading
    d = R.numerator.degree
    return alpha_class.root_product() * decay ** (alpha_class.degree * geometric_count(d, k))


@dataclass(frozen=True)
class TreeCount:
    schema_name: str
    level: int
    method: str
    factored: FactoredInteger
    log_value: float
    exact_available: bool

    @classmethod
    def of(cls, schema_name: str, level: int, method: str, factored: FactoredInteger,
           digit_cap: Optional[int] = None) -> "TreeCount":
        cap = get_settings().digit_cap if digit_cap is None else digit_cap
        return cls(
            schema_name=schema_name,
            level=level,
            method=method,
            factored=factored,
            log_value=factored.log(),
            exact_available=factored.digits() <= cap,
        )

    @classmethod
    def from_int(cls, schema_name: str, level: int, method: str, value: int) -> "TreeCount":
        if value < 1:
            raise InvariantBreach(f"{method} count {value} is not a positive integer")
        return cls.of(schema_name, level, method, FactoredInteger.from_rational(FactoredRational.from_int(value)))

    def exact(self) -> Optional[int]:
        return self.factored.to_int() if self.exact_available else None

    def exact_text(self) -> Optional[str]:
        value = self.exact()
        return None if value is None else int_to_decimal(value)

    def to_output(self) -> CountOutput:
        value = self.exact_text()
        return CountOutput(
            schema=self.schema_name,
            level=self.level,
            method=self.method,
            factored={str(p): str(e) for p, e in self.factored.exponents},
            log10=self.factored.log10(),
            digits=self.factored.digits(),
            exact=value,
        )

    def describe(self) -> str:
        value = self.exact_text()
        if not self.factored.exponents:
            return "1"
        if len(self.factored.exponents) == 1 and self.factored.exponents[0][1] == 1 and value is not None:
            return value
        return f"{self.factored} = {value}" if value is not None else f"{self.factored} (~10^{self.factored.log10():.2f})"


def tau_decimation(s: SubstitutionSchema, n: int, digit_cap: Optional[int] = None) -> TreeCount:
    """Spanning trees of ``V_n`` from the decimated spectrum.

    Raises:
        DecimationInapplicable: For oracle-only schemas
        InvariantBreach: If the assembled value is not a positive integer
    """
    engine = engine_for(s)
    data = engine.data
    decay = FactoredRational.from_fraction(data.decay)
    total = degree_ratio(s, n)
    for (base, k), mult in sorted(engine.level(n).items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1])):
        if base == ZERO_CLASS:
            continue
        norm = FactoredRational.from_fraction(base.root_product())
        total = total * norm**mult
        total = total * decay ** (mult * base.degree * geometric_count(data.d, k))
    total = abs(total)
    if not total.is_integer:
        negative = {p: e for p, e in total.exponents if e < 0}
        raise InvariantBreach(f"{s.name} level {n}: tree count has negative exponents {negative}")
    return TreeCount.of(s.name, n, "decimation", FactoredInteger.from_rational(total), digit_cap)


# --- asymptotics ----------------------------------------------------------------

@dataclass(frozen=True)
class ComplexityEstimate:
    numeric: float
    per_prime_coefficients: Optional[Dict[int, Fraction]]
    n_used: int
    residual: float
    differences: Tuple[float, ...] = field(default=())

    @property
    def rationalized(self) -> bool:
        return self.per_prime_coefficients is not None

    def describe(self) -> str:
        if not self.rationalized:
            return f"{self.numeric:.12g} (unrationalized)"
        terms = []
        for p, q in sorted(self.per_prime_coefficients.items()):
            if q == 0:
                continue
            if q == 1:
                terms.append(f"log {p}")
            elif q.denominator == 1:
                terms.append(f"{q.numerator}·log {p}")
            else:
                terms.append(f"{q.numerator}/{q.denominator}·log {p}")
        return f"{' + '.join(terms) or '0'} ≈ {self.numeric:.6f}"


def _aitken(x0: Fraction, x1: Fraction, x2: Fraction) -> Fraction:
    denom = x2 - 2 * x1 + x0
    if denom == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / denom


def complexity_constant(
    s: SubstitutionSchema,
    n_max: int = 30,
    tol: float = 1e-12,
    max_denominator: int = 10**4,
) -> ComplexityEstimate:
    """Estimate ``lim log tau(V_n) / |V_n|`` from the exact exponent sequences."""
    counts = [tau_decimation(s, n) for n in range(n_max + 1)]
    sizes = [vertex_count(s, n) for n in range(n_max + 1)]
    primes = sorted({p for c in counts for p in c.factored.primes})

    per_level = [c.log_value / v for c, v in zip(counts, sizes)]
    differences = tuple(b - a for a, b in zip(per_level, per_level[1:]))

    coefficients: Optional[Dict[int, Fraction]] = {} if n_max >= 4 else None
    estimates: Dict[int, Fraction] = {}
    for p in primes:
        ratios = [Fraction(c.factored.exponent(p), v) for c, v in zip(counts, sizes)]
        if n_max < 4:
            estimates[p] = ratios[-1]
            continue
        previous = _aitken(*ratios[-4:-1])
        latest = _aitken(*ratios[-3:])
        estimates[p] = latest
        guess = latest.limit_denominator(max_denominator)
        if coefficients is not None and abs(latest - previous) < tol and abs(guess - latest) < tol:
            coefficients[p] = guess
        else:
            logger.info("%s: coefficient of log %d did not settle (last step %.3g)", s.name, p,
                        float(abs(latest - previous)))
            coefficients = None

    extrapolated = math.fsum(float(q) * math.log(p) for p, q in estimates.items())
    if coefficients is not None:
        numeric = math.fsum(float(q) * math.log(p) for p, q in coefficients.items())
        residual = abs(numeric - extrapolated)
    else:
        numeric = extrapolated
        residual = abs(differences[-1]) if differences else float("inf")
    return ComplexityEstimate(
        numeric=numeric,
        per_prime_coefficients=coefficients,
        n_used=n_max,
        residual=residual,
        differences=differences,
    )


@dataclass(frozen=True)
class BoundsReport:
    level: int
    log_tau: float
    lower: float
    upper: float
    tree_case: bool
    ok: bool


def bounds_check(s: SubstitutionSchema, n: int, tau: TreeCount, rel_tol: float = 1e-9) -> BoundsReport:
    """``m^n (N0 - 2) log N0 <= log tau(V_n) <= (|V_n| - 2) log |V_n|``.

    Raises:
        InvariantBreach: If a bound is violated
    """
    log_tau = tau.log_value
    if v1_graph(s).is_tree():
        if tau.factored.exponents:
            raise InvariantBreach(f"{s.name}: V_1 is a tree but tau(V_{n}) = {tau.factored}")
        return BoundsReport(level=n, log_tau=0.0, lower=0.0, upper=0.0, tree_case=True, ok=True)
    size = vertex_count(s, n)
    lower = s.num_cells**n * (s.boundary_size - 2) * math.log(s.boundary_size)
    upper = (size - 2) * math.log(size)
    slack = rel_tol * max(1.0, abs(lower), abs(upper))
    ok = lower - slack <= log_tau <= upper + slack
    if not ok:
        raise InvariantBreach(
            f"{s.name} level {n}: log tau = {log_tau} outside [{lower}, {upper}]"
        )
    return BoundsReport(level=n, log_tau=log_tau, lower=lower, upper=upper, tree_case=False, ok=ok)


def verify(s: SubstitutionSchema, n: int, **overrides) -> dict:
    """Cross-check decimation against both determinant oracles; see :mod:`fractal_trees.verify_graph`."""
    from .verify_graph import run_verify

    return run_verify(s, n, **overrides)

