"""Exact univariate polynomials and rational functions over the rationals.

Everything here is a thin, immutable layer over :class:`sympy.Poly` with a
canonical form that makes equality syntactic:

* a :class:`UniPoly` is ``content * primitive`` where ``primitive`` has
  coprime integer coefficients and a positive leading coefficient;
* a :class:`RationalFunction` keeps numerator and denominator coprime, with the
  denominator primitive, so ``Q(0)`` and the leading coefficient ``P_d`` can be
  read straight off the stored form.

Eigenvalue classes (conjugate roots of one irreducible polynomial) are handled
as monic irreducible :class:`UniPoly` values; see :func:`preimage_poly` and
:func:`image_class`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from sympy import Poly, QQ, Rational, Symbol, resultant

from ..errors import AlgebraError, PoleError, ReducibleClassError

X = Symbol("x")
_Y = Symbol("y")

RationalValue = Fraction


def to_fraction(value) -> Fraction:
    """Convert sympy / gmpy / flint / builtin rationals to :class:`Fraction`."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        num, den = value.numerator, value.denominator
        num = num() if callable(num) else num
        den = den() if callable(den) else den
        return Fraction(int(num), int(den))
    return Fraction(str(value))


def _rational(value) -> Rational:
    f = to_fraction(value)
    return Rational(f.numerator, f.denominator)


@dataclass(frozen=True, eq=False)
class UniPoly:
    poly: Poly

    # --- construction -----------------------------------------------------
    @classmethod
    def from_coefficients(cls, coefficients: Iterable) -> "UniPoly":
        """Build from ascending coefficients (``[c0, c1, ...]``)."""
        desc = [_rational(c) for c in reversed(list(coefficients))] or [Rational(0)]
        return cls(Poly.from_list(desc, X, domain=QQ))

    @classmethod
    def from_expr(cls, expr) -> "UniPoly":
        return cls(Poly(expr, X, domain=QQ))

    @classmethod
    def constant(cls, value) -> "UniPoly":
        return cls.from_coefficients([value])

    @classmethod
    def x(cls) -> "UniPoly":
        return cls.from_coefficients([0, 1])

    @classmethod
    def linear_root(cls, root) -> "UniPoly":
        """Monic ``x - root``."""
        return cls.from_coefficients([-to_fraction(root), 1])

    # --- views ------------------------------------------------------------
    @cached_property
    def coefficients(self) -> tuple[Fraction, ...]:
        """Ascending coefficients; ``(0,)`` for the zero polynomial."""
        return tuple(to_fraction(c) for c in reversed(self.poly.all_coeffs()))

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else int(self.poly.degree())

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1]

    @property
    def constant_term(self) -> Fraction:
        return self.coefficients[0]

    def coefficient(self, i: int) -> Fraction:
        return self.coefficients[i] if 0 <= i < len(self.coefficients) else Fraction(0)

    @cached_property
    def content(self) -> Fraction:
        """Rational factor with ``self == content * primitive``; carries the sign."""
        if self.is_zero:
            return Fraction(0)
        coeffs = self.coefficients
        lcm = math.lcm(*(c.denominator for c in coeffs))
        ints = [int(c * lcm) for c in coeffs]
        g = math.gcd(*ints)
        sign = 1 if ints[-1] > 0 else -1
        return Fraction(sign * g, lcm)

    @cached_property
    def primitive(self) -> "UniPoly":
        if self.is_zero:
            return self
        return self.scale(1 / self.content)

    @property
    def primitive_coefficients(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.primitive.coefficients)

    def monic(self) -> "UniPoly":
        if self.is_zero:
            raise AlgebraError("zero polynomial has no monic form")
        return UniPoly(self.poly.monic())

    @property
    def is_monic(self) -> bool:
        return not self.is_zero and self.leading == 1

    def root_sum(self) -> Fraction:
        """Sum of the roots with multiplicity."""
        if self.degree < 1:
            return Fraction(0)
        return -self.coefficient(self.degree - 1) / self.leading

    def root_product(self) -> Fraction:
        """Product of the roots with multiplicity."""
        if self.degree < 1:
            return Fraction(1)
        sign = -1 if self.degree % 2 else 1
        return sign * self.constant_term / self.leading

    def count_roots(self, lo, hi) -> int:
        """Number of real roots in ``[lo, hi]``, with multiplicity."""
        return int(self.poly.count_roots(_rational(lo), _rational(hi)))

    def as_expr(self):
        return self.poly.as_expr()

    # --- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly.constant(other)

    def __add__(self, other) -> "UniPoly":
        return UniPoly(self.poly + self._coerce(other).poly)

    __radd__ = __add__

    def __sub__(self, other) -> "UniPoly":
        return UniPoly(self.poly - self._coerce(other).poly)

    def __rsub__(self, other) -> "UniPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "UniPoly":
        return UniPoly(self.poly * self._coerce(other).poly)

    __rmul__ = __mul__

    def __neg__(self) -> "UniPoly":
        return UniPoly(-self.poly)

    def __pow__(self, exponent: int) -> "UniPoly":
        return UniPoly(self.poly ** exponent)

    def scale(self, factor) -> "UniPoly":
        return UniPoly(self.poly * _rational(factor))

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero:
            raise AlgebraError("polynomial division by zero")
        q, r = self.poly.div(other.poly)
        return UniPoly(q), UniPoly(r)

    def __floordiv__(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[0]

    def __mod__(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[1]

    def divides(self, other: "UniPoly") -> bool:
        """True when ``self`` divides ``other``."""
        return (other % self).is_zero

    def gcd(self, other: "UniPoly") -> "UniPoly":
        return UniPoly(self.poly.gcd(other.poly))

    def derivative(self) -> "UniPoly":
        return UniPoly(self.poly.diff(X))

    def evaluate(self, value) -> Fraction:
        return to_fraction(self.poly.eval(_rational(value)))

    # --- identity ---------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self.coefficients == other.coefficients
        if isinstance(other, (int, Fraction)):
            return self.degree <= 0 and self.constant_term == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def sort_key(self) -> tuple:
        return (self.degree, self.coefficients)

    def __repr__(self) -> str:
        return f"UniPoly({self.as_expr()})"

    def __str__(self) -> str:
        return str(self.as_expr())


@dataclass(frozen=True)
class Factorization:
    content: Fraction
    factors: tuple[tuple[UniPoly, int], ...]

    def expand(self) -> UniPoly:
        out = UniPoly.constant(self.content)
        for f, k in self.factors:
            out = out * f ** k
        return out

    def multiplicity(self, factor: UniPoly) -> int:
        target = factor.primitive
        for f, k in self.factors:
            if f == target:
                return k
        return 0

    def __iter__(self):
        return iter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)


def factor_rational(p: UniPoly) -> Factorization:
    """Complete factorization over the rationals.

    Factors are primitive integer polynomials with positive leading
    coefficient, sorted by ``(degree, coefficients)``.
    """
    if p.is_zero:
        raise AlgebraError("cannot factor the zero polynomial")
    coeff, raw = p.poly.factor_list()
    content = to_fraction(coeff)
    factors = []
    for f, k in raw:
        u = UniPoly(f.set_domain(QQ))
        content *= u.content ** k
        factors.append((u.primitive, int(k)))
    factors.sort(key=lambda fk: fk[0].sort_key())
    return Factorization(content, tuple(factors))


def is_irreducible(p: UniPoly) -> bool:
    if p.degree < 1:
        return False
    factors = factor_rational(p).factors
    return len(factors) == 1 and factors[0][1] == 1


def irreducible_factors(p: UniPoly) -> list[UniPoly]:
    """Distinct monic irreducible factors, sorted."""
    return [f.monic() for f, _ in factor_rational(p).factors]


def homogeneous_compose(a: UniPoly, num: UniPoly, den: UniPoly, order: int) -> UniPoly:
    """``sum_i a_i * num^i * den^(order - i)`` (Horner form)."""
    den_powers = [UniPoly.constant(1)]
    for _ in range(order):
        den_powers.append(den_powers[-1] * den)
    out = UniPoly.constant(a.coefficient(order))
    for i in range(order - 1, -1, -1):
        out = out * num + den_powers[order - i].scale(a.coefficient(i))
    return out


@dataclass(frozen=True, eq=False)
class RationalFunction:
    numerator: UniPoly
    denominator: UniPoly

    @classmethod
    def of(cls, numerator, denominator=None) -> "RationalFunction":
        """Canonical coprime form with a primitive, positively led denominator."""
        num = numerator if isinstance(numerator, UniPoly) else UniPoly.constant(numerator)
        if denominator is None:
            den = UniPoly.constant(1)
        else:
            den = denominator if isinstance(denominator, UniPoly) else UniPoly.constant(denominator)
        if den.is_zero:
            raise AlgebraError("rational function with zero denominator")
        if num.is_zero:
            return cls(num, UniPoly.constant(1))
        g = num.gcd(den)
        if g.degree > 0:
            num, den = num // g, den // g
        c = den.content
        return cls(num.scale(1 / c), den.primitive)

    @classmethod
    def from_expr(cls, expr) -> "RationalFunction":
        from sympy import cancel, fraction, together

        n, d = fraction(cancel(together(expr)))
        return cls.of(UniPoly.from_expr(n), UniPoly.from_expr(d))

    @classmethod
    def constant(cls, value) -> "RationalFunction":
        return cls.of(UniPoly.constant(value))

    @classmethod
    def x(cls) -> "RationalFunction":
        return cls.of(UniPoly.x())

    def as_expr(self):
        return self.numerator.as_expr() / self.denominator.as_expr()

    # --- views ------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero

    @property
    def is_constant(self) -> bool:
        return self.numerator.degree <= 0 and self.denominator.degree == 0

    @property
    def degree(self) -> int:
        return max(self.numerator.degree, self.denominator.degree)

    # --- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, UniPoly):
            return RationalFunction.of(other)
        return RationalFunction.constant(other)

    def __add__(self, other) -> "RationalFunction":
        o = self._coerce(other)
        return RationalFunction.of(
            self.numerator * o.denominator + o.numerator * self.denominator,
            self.denominator * o.denominator,
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.numerator, self.denominator)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        o = self._coerce(other)
        return RationalFunction.of(self.numerator * o.numerator, self.denominator * o.denominator)

    __rmul__ = __mul__

    def invert(self) -> "RationalFunction":
        if self.is_zero:
            raise AlgebraError("inverse of the zero function")
        return RationalFunction.of(self.denominator, self.numerator)

    def __truediv__(self, other) -> "RationalFunction":
        return self * self._coerce(other).invert()

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) * self.invert()

    def compose(self, inner: "RationalFunction") -> "RationalFunction":
        """``self(inner(x))``."""
        order = max(self.degree, 0)
        return RationalFunction.of(
            homogeneous_compose(self.numerator, inner.numerator, inner.denominator, order),
            homogeneous_compose(self.denominator, inner.numerator, inner.denominator, order),
        )

    def evaluate(self, value) -> Fraction:
        den = self.denominator.evaluate(value)
        if den == 0:
            raise PoleError(f"{self} has a pole at {value}")
        return self.numerator.evaluate(value) / den

    __call__ = evaluate

    def derivative(self) -> "RationalFunction":
        n, d = self.numerator, self.denominator
        return RationalFunction.of(n.derivative() * d - n * d.derivative(), d * d)

    def __eq__(self, other) -> bool:
        if isinstance(other, (RationalFunction, UniPoly, int, Fraction)):
            o = self._coerce(other)
            return self.numerator == o.numerator and self.denominator == o.denominator
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def __repr__(self) -> str:
        return f"RationalFunction(({self.numerator})/({self.denominator}))"

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"({self.numerator})/({self.denominator})"


def _require_expanding(R: RationalFunction) -> None:
    if R.is_constant:
        raise AlgebraError("R must be nonconstant")
    if R.numerator.degree <= R.denominator.degree:
        raise AlgebraError("R needs deg(numerator) > deg(denominator)")


def preimage_poly(R: RationalFunction, beta_class: UniPoly, k: int) -> UniPoly:
    """Monic polynomial whose roots are ``R^(-k)`` of the class roots.

    Degree is ``g * d**k`` for a degree-``g`` class; roots are counted with
    multiplicity. Each step is the resultant of the previous class polynomial
    with ``P(x) - y*Q(x)``, which for a numerator linear in ``y`` is the
    homogeneous composition ``sum_i f_i P^i Q^(g - i)``.
    """
    _require_expanding(R)
    if k < 0:
        raise AlgebraError("preimage depth must be non-negative")
    if not is_irreducible(beta_class):
        raise ReducibleClassError(f"{beta_class} is not irreducible over Q")
    out = beta_class.monic()
    for _ in range(k):
        out = homogeneous_compose(out, R.numerator, R.denominator, out.degree).monic()
    return out


def image_class(R: RationalFunction, cls: UniPoly) -> UniPoly | None:
    """Monic minimal polynomial of ``R(alpha)`` for ``alpha`` a root of ``cls``.

    Returns ``None`` when the class consists of poles of ``R``.
    """
    if cls.divides(R.denominator) or R.denominator.gcd(cls).degree > 0:
        return None
    if cls.degree == 1:
        root = -cls.constant_term / cls.leading
        return UniPoly.linear_root(R.evaluate(root))
    c_y = cls.as_expr().subs(X, _Y)
    p_y = R.numerator.as_expr().subs(X, _Y)
    q_y = R.denominator.as_expr().subs(X, _Y)
    res = UniPoly.from_expr(resultant(c_y, X * q_y - p_y, _Y))
    if res.degree < 1:
        return None
    distinct = irreducible_factors(res)
    if len(distinct) != 1:
        raise ReducibleClassError(f"image of {cls} under R is not a single class")
    return distinct[0]


def poly_product(factors: Sequence[tuple[UniPoly, int]]) -> UniPoly:
    out = UniPoly.constant(1)
    for f, k in factors:
        out = out * f ** k
    return out
