"""Spectral decimation engine.

From the boundary/interior split of ``P_1`` the Schur complement
``S(z) = (A - zI) - B (D - zI)^{-1} C`` yields the scalar functions ``phi``
and ``R`` with ``S = phi * (P_0 - R I)``. The spectrum of ``P_n`` is then
tracked level by level as a multiset of *classes*: an irreducible base
polynomial ``b`` at depth ``k`` stands for every root of ``R^{-k}(b)``, each
with the same multiplicity. Exceptional values (the spectrum of ``D`` and the
zeros of ``phi``) get their multiplicities from closed formulas instead.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra.matrices import RatFuncMatrix, RatMatrix, char_poly, solve_linear_ratfunc
from .algebra.polynomials import (
    Factorization,
    RationalFunction,
    UniPoly,
    factor_rational,
    image_class,
    irreducible_factors,
    preimage_poly,
    poly_product,
)
from .config import get_settings
from .errors import DecimationInapplicable, InvariantBreach, ResourceCapExceeded, VerificationMismatch
from .fractal_model import build_graph, v1_graph, validate_schema, vertex_count
from .matrix_tree import laplacians
from .state import SpectralClassDump, SpectrumDump, SubstitutionSchema

logger = logging.getLogger(__name__)

ZERO_CLASS = UniPoly.x()

# hypotheses of each multiplicity rule, as predicate -> required value
ITEM_HYPOTHESES: Dict[int, Dict[str, bool]] = {
    2: {"in_sigma_D": False, "phi_zero": True, "R_removable": True},
    3: {"in_sigma_D": True, "phi_pole": True, "phiR_pole": True, "R_removable": True, "Rprime_nonzero": True},
    4: {"in_sigma_D": True, "phi_pole": False, "phiR_pole": False, "phi_zero": False},
    5: {"in_sigma_D": True, "phi_pole": False, "phiR_pole": False, "phi_zero": True},
    6: {"in_sigma_D": True, "phi_pole": True, "phiR_pole": True, "R_removable": True, "Rprime_nonzero": False},
    7: {"in_sigma_D": False, "phi_zero": True, "R_pole": True},
    8: {"in_sigma_D": True, "phi_pole": False, "phiR_pole": False, "phi_zero": True, "R_pole": True},
}


@dataclass(frozen=True)
class ExceptionalClass:
    minpoly: UniPoly
    item: Optional[int]
    mult_D: int
    predicates: Dict[str, bool]
    notes: Tuple[str, ...] = ()

    def multiplicity(self, num_cells: int, n: int, prev_vertices: int, mu: int) -> int:
        """Multiplicity at level ``n >= 1`` given ``mu = mult_{n-1}(R(z))``."""
        base = num_cells ** (n - 1) * self.mult_D
        v = prev_vertices
        return {
            2: v,
            3: base - v + mu,
            4: base + mu,
            5: base + v + mu,
            6: base - v + 2 * mu,
            7: 0,
            8: base,
        }[self.item]


@dataclass(frozen=True)
class DecimationData:
    schema_name: str
    num_cells: int
    boundary_size: int
    phi: RationalFunction
    R: RationalFunction
    S: RatFuncMatrix
    chi_D: UniPoly
    sigma_D: Factorization
    R_raw: Tuple[UniPoly, UniPoly]
    exceptional_classes: Tuple[ExceptionalClass, ...] = ()

    @property
    def d(self) -> int:
        return self.R.numerator.degree

    @property
    def P_d(self) -> Fraction:
        return self.R.numerator.leading

    @property
    def Q0(self) -> Fraction:
        return self.R.denominator.constant_term

    @property
    def decay(self) -> Fraction:
        """``-Q(0) / P_d``, the per-preimage factor of root products."""
        return -self.Q0 / self.P_d


def _p1_blocks(s: SubstitutionSchema) -> tuple[RatMatrix, RatMatrix, RatMatrix, RatMatrix]:
    g = v1_graph(s)
    P = laplacians(g).P
    boundary = list(s.v1.boundary)
    interior = [v for v in range(g.vertex_count) if v not in set(boundary)]
    if not interior:
        raise DecimationInapplicable(f"{s.name}: V_1 has no interior vertices")
    A = P.submatrix(boundary, boundary)
    B = P.submatrix(boundary, interior)
    C = P.submatrix(interior, boundary)
    D = P.submatrix(interior, interior)
    return A, B, C, D


def _entrywise_identity(S: RatFuncMatrix, phi: RationalFunction, R: RationalFunction, n0: int) -> None:
    off = Fraction(-1, n0 - 1)
    for i in range(n0):
        for j in range(n0):
            p0 = Fraction(1) if i == j else off
            expected = phi * (RationalFunction.constant(p0) - (R if i == j else 0))
            if S[i, j] != expected:
                raise DecimationInapplicable(
                    f"S[{i},{j}] = {S[i, j]} is not phi * (P0 - R I) = {expected}; "
                    "boundary numbering or symmetry is off"
                )


def schur_extract(s: SubstitutionSchema) -> DecimationData:
    """Extract ``phi`` and ``R`` and classify the exceptional set.

    Raises:
        DecimationInapplicable: If the schema is oracle-only or ``R`` is degenerate
    """
    report = validate_schema(s)
    if not report.decimation_eligible:
        failing = [c.name for c in report.checks if not c.passed]
        raise DecimationInapplicable(f"{s.name} is oracle-only (failed: {', '.join(failing)})")

    n0 = s.boundary_size
    A, B, C, D = _p1_blocks(s)
    if A != RatMatrix.identity(n0):
        raise DecimationInapplicable(f"{s.name}: boundary block of P_1 is not the identity")

    z = RationalFunction.x()
    Y = solve_linear_ratfunc(RatFuncMatrix.from_rat(D, shift=z), RatFuncMatrix.from_rat(C))
    S = RatFuncMatrix.from_rat(A, shift=z) - RatFuncMatrix.from_rat(B) @ Y

    phi = S[0, 1] * (-(n0 - 1))
    if phi.is_zero:
        raise DecimationInapplicable(f"{s.name}: phi vanishes identically")
    R = 1 - S[0, 0] / phi
    _entrywise_identity(S, phi, R, n0)

    if R.denominator.evaluate(0) == 0 or R.numerator.evaluate(0) != 0:
        raise DecimationInapplicable(f"{s.name}: R(0) != 0 for R = {R}")
    if R.numerator.degree <= R.denominator.degree:
        raise DecimationInapplicable(f"{s.name}: R = {R} needs deg P > deg Q")

    # R = (phi - S11) / phi before cancellation
    a, b = phi.numerator, phi.denominator
    c, e = S[0, 0].numerator, S[0, 0].denominator
    R_raw = (a * e - c * b, a * e)

    chi_D = char_poly(D).monic()
    data = DecimationData(
        schema_name=s.name,
        num_cells=s.num_cells,
        boundary_size=n0,
        phi=phi,
        R=R,
        S=S,
        chi_D=chi_D,
        sigma_D=factor_rational(chi_D),
        R_raw=R_raw,
    )
    logger.debug("%s: R = %s, phi = %s", s.name, R, phi)
    return replace(data, exceptional_classes=tuple(classify_exceptional(data)))


def _item_for(p: Dict[str, bool]) -> Optional[int]:
    if not p["in_sigma_D"]:
        if p["phi_zero"]:
            return 7 if p["R_pole"] else 2
        return None
    if p["phi_pole"]:
        if p["R_pole"]:
            return None
        return 3 if p["Rprime_nonzero"] else 6
    if not p["phi_zero"]:
        return 4
    return 8 if p["R_pole"] else 5


def classify_exceptional(dd: DecimationData) -> List[ExceptionalClass]:
    """Assign every exceptional class the multiplicity rule it falls under.

    Raises:
        DecimationInapplicable: If a class fits none of the rules
    """
    phiR = dd.phi * dd.R
    Rprime = dd.R.derivative()
    raw_num, raw_den = dd.R_raw
    out = []
    for f in irreducible_factors(dd.chi_D * dd.phi.numerator):
        if f == ZERO_CLASS:
            logger.warning("%s: zero is exceptional; left to the connectivity rule", dd.schema_name)
            continue
        p = {
            "in_sigma_D": f.divides(dd.chi_D),
            "phi_zero": f.divides(dd.phi.numerator),
            "phi_pole": f.divides(dd.phi.denominator),
            "phiR_pole": f.divides(phiR.denominator),
            "R_pole": f.divides(dd.R.denominator),
            "R_removable": f.divides(raw_num) and f.divides(raw_den),
            "Rprime_nonzero": not f.divides(Rprime.numerator),
        }
        item = _item_for(p)
        if item is None:
            raise DecimationInapplicable(
                f"{dd.schema_name}: exceptional class {f} fits no multiplicity rule ({p})"
            )
        notes = tuple(
            f"{name} is {p[name]} but rule {item} assumes {want}"
            for name, want in ITEM_HYPOTHESES[item].items()
            if p[name] != want
        )
        for note in notes:
            logger.warning("%s: class %s: %s", dd.schema_name, f, note)
        out.append(
            ExceptionalClass(
                minpoly=f,
                item=item,
                mult_D=dd.sigma_D.multiplicity(f),
                predicates=p,
                notes=notes,
            )
        )
    return sorted(out, key=lambda c: c.minpoly.sort_key())


# --- spectrum -----------------------------------------------------------------

@dataclass(frozen=True)
class SpectralClass:
    base: UniPoly
    depth: int
    origin: str
    degree: int
    root_sum: Fraction

    def minpoly(self, R: RationalFunction) -> UniPoly:
        """``R^{-depth}`` of the base, monic; degree ``g * d**depth``."""
        if self.base == ZERO_CLASS:
            return ZERO_CLASS
        return preimage_poly(R, self.base, self.depth)


@dataclass(frozen=True)
class SpectralMultiset:
    level: int
    entries: Tuple[Tuple[SpectralClass, int], ...]
    R: RationalFunction = field(compare=False, repr=False)

    def multiplicity(self, base: UniPoly, depth: int = 0) -> int:
        for cls, mult in self.entries:
            if cls.base == base and cls.depth == depth:
                return mult
        return 0

    def value_multiplicity(self, value, depth: int = 0) -> int:
        return self.multiplicity(UniPoly.linear_root(value), depth)

    @property
    def total(self) -> int:
        return sum(cls.degree * mult for cls, mult in self.entries)


Key = Tuple[UniPoly, int]


def _escape_radius(R: RationalFunction) -> Optional[Fraction]:
    """A radius ``rho >= 2`` with ``|R(z)| >= |z|`` whenever ``|z| >= rho``."""
    P, Q = R.numerator, R.denominator
    d = P.degree
    lead = abs(P.leading)
    rho = Fraction(2)
    for _ in range(64):
        tail = sum(abs(P.coefficient(i)) * rho ** (i - d) for i in range(d))
        tail += sum(abs(Q.coefficient(j)) * rho ** (j + 1 - d) for j in range(Q.degree + 1))
        if lead - tail > 0:
            return rho
        rho *= 2
    return None


def _min_root_modulus(f: UniPoly) -> Fraction:
    if f.degree == 1:
        return abs(f.constant_term / f.leading)
    a0 = abs(f.constant_term)
    rest = max(abs(f.coefficient(i)) for i in range(1, f.degree + 1))
    return a0 / (a0 + rest)


class DecimationEngine:
    """Level-by-level spectrum of ``P_n`` for one schema; levels are memoized."""

    def __init__(self, s: SubstitutionSchema) -> None:
        self.schema = s
        self.data = schur_extract(s)
        self.R = self.data.R
        self.exceptional: Dict[UniPoly, ExceptionalClass] = {
            c.minpoly: c for c in self.data.exceptional_classes
        }
        self._rho = _escape_radius(self.R)
        self._orbits: Dict[UniPoly, List[Optional[UniPoly]]] = {e: [] for e in self.exceptional}
        self._root_sums: Dict[Key, Fraction] = {}
        self._levels: List[Dict[Key, int]] = [self._level_zero()]
        self._lock = threading.RLock()

    # --- class bookkeeping --------------------------------------------------
    def _level_zero(self) -> Dict[Key, int]:
        n0 = self.schema.boundary_size
        return {
            (ZERO_CLASS, 0): 1,
            (UniPoly.linear_root(Fraction(n0, n0 - 1)), 0): n0 - 1,
        }

    def degree(self, key: Key) -> int:
        base, k = key
        return base.degree * self.data.d**k

    def root_sum(self, key: Key) -> Fraction:
        base, k = key
        if k == 0:
            return base.root_sum()
        if key not in self._root_sums:
            P, Q = self.R.numerator, self.R.denominator
            d = self.data.d
            q_top = Q.coefficient(d - 1)
            prev = self.root_sum((base, k - 1))
            g = self.degree((base, k - 1))
            self._root_sums[key] = -(g * P.coefficient(d - 1) - q_top * prev) / P.leading
        return self._root_sums[key]

    def _escaped(self, cls: UniPoly) -> bool:
        return self._rho is not None and _min_root_modulus(cls) >= self._rho

    def orbit_at(self, e: UniPoly, j: int) -> Optional[UniPoly]:
        """Class of ``R^{j+1}(e)``, or ``None`` past a pole or an escape."""
        orbit = self._orbits[e]
        while len(orbit) <= j:
            prev = orbit[-1] if orbit else e
            if orbit and (prev is None or self._escaped(prev)):
                orbit.append(None)
                continue
            orbit.append(image_class(self.R, prev))
        return orbit[j]

    def _touching(self, key: Key) -> List[UniPoly]:
        base, k = key
        return [e for e in self.exceptional if self.orbit_at(e, k) == base]

    def is_terminal(self, base: UniPoly) -> bool:
        return base != ZERO_CLASS and bool(self._touching((base, 0)))

    def origin(self, key: Key) -> str:
        base, k = key
        if base == ZERO_CLASS:
            return "zero"
        return "A" if k == 0 and self.is_terminal(base) else "B"

    # --- levels ---------------------------------------------------------------
    def _next_level(self, n: int, prev: Dict[Key, int]) -> Dict[Key, int]:
        s = self.schema
        out: Dict[Key, int] = {}

        def add(key: Key, mult: int) -> None:
            out[key] = out.get(key, 0) + mult

        for key, mu in prev.items():
            base, k = key
            if base == ZERO_CLASS:
                continue
            if self._touching(key):
                if k >= 1:
                    raise DecimationInapplicable(
                        f"{s.name}: decimation-inapplicable at level {n}, depth {k + 1}"
                    )
                for f in irreducible_factors(preimage_poly(self.R, base, 1)):
                    if f not in self.exceptional:
                        add((f, 0), mu)
            else:
                add((base, k + 1), mu)

        add((ZERO_CLASS, 0), 1)
        for f in irreducible_factors(self.R.numerator):
            if f != ZERO_CLASS and f not in self.exceptional:
                add((f, 0), 1)

        prev_vertices = vertex_count(s, n - 1)
        for e, cls in self.exceptional.items():
            mu = sum(m for (b, k), m in prev.items() if self.orbit_at(e, k) == b)
            mult = cls.multiplicity(s.num_cells, n, prev_vertices, mu)
            if mult < 0:
                raise DecimationInapplicable(
                    f"{s.name}: rule {cls.item} gives multiplicity {mult} for {e} at level {n}"
                )
            if mult:
                add((e, 0), mult)

        return {key: m for key, m in out.items() if m}

    def _check_level(self, n: int, entries: Dict[Key, int]) -> None:
        size = vertex_count(self.schema, n)
        count = sum(self.degree(key) * m for key, m in entries.items())
        trace = sum(self.root_sum(key) * m for key, m in entries.items())
        zero = entries.get((ZERO_CLASS, 0), 0)
        if count != size or trace != size or zero != 1:
            raise InvariantBreach(
                f"{self.schema.name} level {n}: degree count {count}, trace {trace}, "
                f"mult(0) {zero}; expected |V_n| = {size} and mult(0) = 1"
            )

    def level(self, n: int) -> Dict[Key, int]:
        if n < 0:
            raise ValueError("level must be non-negative")
        with self._lock:
            while len(self._levels) <= n:
                k = len(self._levels)
                entries = self._next_level(k, self._levels[-1])
                self._check_level(k, entries)
                self._levels.append(entries)
                logger.debug("%s: level %d has %d classes", self.schema.name, k, len(entries))
            return self._levels[n]

    def spectrum(self, n: int) -> SpectralMultiset:
        entries = self.level(n)
        with self._lock:
            classes = [
                (
                    SpectralClass(
                        base=base,
                        depth=k,
                        origin=self.origin((base, k)),
                        degree=self.degree((base, k)),
                        root_sum=self.root_sum((base, k)),
                    ),
                    m,
                )
                for (base, k), m in entries.items()
            ]
        classes.sort(key=lambda cm: (cm[0].base.sort_key(), cm[0].depth))
        return SpectralMultiset(level=n, entries=tuple(classes), R=self.R)


_ENGINES: Dict[str, DecimationEngine] = {}
_ENGINES_LOCK = threading.Lock()


def engine_for(s: SubstitutionSchema) -> DecimationEngine:
    key = s.model_dump_json()
    engine = _ENGINES.get(key)
    if engine is None:
        with _ENGINES_LOCK:
            engine = _ENGINES.get(key)
            if engine is None:
                engine = DecimationEngine(s)
                _ENGINES[key] = engine
    return engine


def spectrum(s: SubstitutionSchema, n: int) -> SpectralMultiset:
    return engine_for(s).spectrum(n)


def value_sets(s: SubstitutionSchema, n: int = 3) -> Tuple[List[UniPoly], List[UniPoly]]:
    """Bases of terminal classes (``A``) and of the other nonzero classes (``B``) seen up to level ``n``."""
    engine = engine_for(s)
    A, B = set(), set()
    with engine._lock:
        for level in range(1, n + 1):
            for base, _ in engine.level(level):
                if base == ZERO_CLASS:
                    continue
                (A if engine.is_terminal(base) else B).add(base)
    return sorted(A, key=UniPoly.sort_key), sorted(B, key=UniPoly.sort_key)


def spectrum_product(ms: SpectralMultiset) -> UniPoly:
    """Monic ``prod minpoly^mult`` over all classes."""
    return poly_product([(cls.minpoly(ms.R), m) for cls, m in ms.entries])


def charpoly_check(s: SubstitutionSchema, n: int, cap: Optional[int] = None) -> bool:
    """Compare the symbolic spectrum with ``char_poly(P)`` of the built ``V_n``.

    Raises:
        VerificationMismatch: On the first differing coefficient
    """
    cap = get_settings().probabilistic_vertex_cap if cap is None else cap
    predicted = spectrum_product(spectrum(s, n))
    actual = char_poly(laplacians(build_graph(s, n, cap=cap)).P).monic()
    if predicted != actual:
        width = max(len(predicted.coefficients), len(actual.coefficients))
        for i in range(width):
            if predicted.coefficient(i) != actual.coefficient(i):
                raise VerificationMismatch(
                    f"{s.name} level {n}: x^{i} coefficient {predicted.coefficient(i)} "
                    f"!= {actual.coefficient(i)}"
                )
    return True


def _coeff_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def spectrum_dump(ms: SpectralMultiset, max_degree: int = 4096) -> SpectrumDump:
    classes = []
    for cls, mult in ms.entries:
        if cls.degree > max_degree:
            raise ResourceCapExceeded(
                f"class of degree {cls.degree} at depth {cls.depth} exceeds the dump cap {max_degree}"
            )
        classes.append(
            SpectralClassDump(
                minpoly=[_coeff_str(c) for c in cls.minpoly(ms.R).coefficients],
                depth=cls.depth,
                origin=cls.origin,
                mult=str(mult),
            )
        )
    return SpectrumDump(level=ms.level, classes=classes)
